//! Online semantic-network adapter speaking the ConceptNet HTTP query API,
//! with an on-disk cache keyed by (term, relation filter).

use std::sync::Arc;

use serde::Deserialize;

use crate::graph::{rank_relations, GraphError, Relation, RelatedTerms};
use crate::net::{DiskCache, Transport};

pub const DEFAULT_BASE_URL: &str = "https://api.conceptnet.io";
/// Overrides the service base URL.
pub const BASE_URL_ENV: &str = "DECKFORGE_CONCEPTNET_URL";

pub struct ConceptNetClient {
    base_url: String,
    transport: Arc<dyn Transport>,
    cache: Option<DiskCache>,
    fetch_limit: usize,
}

#[derive(Deserialize)]
struct QueryResponse {
    #[serde(default)]
    edges: Vec<Edge>,
}

#[derive(Deserialize)]
struct Edge {
    start: Node,
    end: Node,
    rel: Node,
    #[serde(default)]
    weight: f64,
}

#[derive(Deserialize)]
struct Node {
    #[serde(rename = "@id")]
    id: String,
    #[serde(default)]
    label: Option<String>,
}

impl ConceptNetClient {
    pub fn new(transport: Arc<dyn Transport>) -> Self {
        let base_url = std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
        ConceptNetClient {
            base_url: base_url.trim_end_matches('/').to_string(),
            transport,
            cache: None,
            fetch_limit: 50,
        }
    }

    pub fn with_base_url(mut self, url: &str) -> Self {
        self.base_url = url.trim_end_matches('/').to_string();
        self
    }

    pub fn with_cache(mut self, cache: DiskCache) -> Self {
        self.cache = Some(cache);
        self
    }

    fn query_url(&self, term: &str, relation: Option<&str>) -> String {
        let node = term.replace(' ', "_");
        let mut url = format!(
            "{}/query?node=/c/en/{}&other=/c/en&limit={}",
            self.base_url, node, self.fetch_limit
        );
        if let Some(rel) = relation {
            url.push_str("&rel=/r/");
            url.push_str(&snake_to_camel(rel));
        }
        url
    }

    fn fetch(&self, term: &str, relation: Option<&str>) -> Result<Vec<Relation>, GraphError> {
        let key = format!("{term}|{}", relation.unwrap_or(""));
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get::<Vec<Relation>>(&key)) {
            return Ok(hit);
        }
        let body = self
            .transport
            .get(&self.query_url(term, relation))
            .map_err(GraphError::SourceUnavailable)?;
        let rels = parse_response(term, &body)?;
        if let Some(cache) = &self.cache {
            if let Err(e) = cache.put(&key, &rels) {
                log::warn!("semantic cache write failed: {e}");
            }
        }
        Ok(rels)
    }
}

impl RelatedTerms for ConceptNetClient {
    fn related(
        &self,
        term: &str,
        relation: Option<&str>,
        limit: usize,
    ) -> Result<Vec<Relation>, GraphError> {
        if limit == 0 {
            return Ok(Vec::new());
        }
        let rels = self.fetch(term, relation)?;
        Ok(rank_relations(term, rels, relation, limit))
    }
}

/// Normalises a query response into relations leaving `term`. Edges point
/// either way in the service; the far end becomes `to_term`.
pub fn parse_response(term: &str, body: &str) -> Result<Vec<Relation>, GraphError> {
    let resp: QueryResponse = serde_json::from_str(body)
        .map_err(|e| GraphError::SourceUnavailable(format!("malformed response: {e}")))?;
    let own = format!("/c/en/{}", term.replace(' ', "_"));
    let mut out = Vec::new();
    for edge in resp.edges {
        let other = if edge.start.id == own || edge.start.id.starts_with(&format!("{own}/")) {
            &edge.end
        } else {
            &edge.start
        };
        if !other.id.starts_with("/c/en/") {
            continue;
        }
        let label = other
            .label
            .clone()
            .unwrap_or_else(|| other.id.trim_start_matches("/c/en/").split('/').next().unwrap_or("").replace('_', " "));
        let to_term = label.trim().to_lowercase();
        if to_term.is_empty() {
            continue;
        }
        out.push(Relation {
            from_term: term.to_string(),
            relation_kind: camel_to_snake(edge.rel.id.trim_start_matches("/r/")),
            to_term,
            weight: edge.weight.max(0.0),
        });
    }
    Ok(out)
}

fn camel_to_snake(s: &str) -> String {
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

fn snake_to_camel(s: &str) -> String {
    s.split('_')
        .map(|part| {
            let mut cs = part.chars();
            match cs.next() {
                Some(first) => first.to_ascii_uppercase().to_string() + cs.as_str(),
                None => String::new(),
            }
        })
        .collect()
}

/// Prefers the online client and falls back to an offline graph whenever the
/// service is unavailable.
pub struct WithFallback<P, F> {
    pub primary: P,
    pub fallback: F,
}

impl<P: RelatedTerms, F: RelatedTerms> RelatedTerms for WithFallback<P, F> {
    fn related(
        &self,
        term: &str,
        relation: Option<&str>,
        limit: usize,
    ) -> Result<Vec<Relation>, GraphError> {
        match self.primary.related(term, relation, limit) {
            Err(GraphError::SourceUnavailable(reason)) => {
                log::warn!("semantic service unavailable ({reason}), using offline graph");
                self.fallback.related(term, relation, limit)
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SemanticGraph;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    const BODY: &str = r#"{"edges":[
        {"start":{"@id":"/c/en/cat","label":"cat"},"end":{"@id":"/c/en/rug","label":"rug"},"rel":{"@id":"/r/AtLocation"},"weight":2.0},
        {"start":{"@id":"/c/en/kitten","label":"kitten"},"end":{"@id":"/c/en/cat","label":"cat"},"rel":{"@id":"/r/RelatedTo"},"weight":1.5},
        {"start":{"@id":"/c/en/cat","label":"cat"},"end":{"@id":"/c/fr/chat","label":"chat"},"rel":{"@id":"/r/Synonym"},"weight":3.0}
    ]}"#;

    struct Fake {
        calls: AtomicUsize,
        urls: Mutex<Vec<String>>,
        fail: bool,
    }

    impl Transport for Fake {
        fn get(&self, url: &str) -> Result<String, String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            self.urls.lock().unwrap().push(url.to_string());
            if self.fail {
                Err("connection refused".into())
            } else {
                Ok(BODY.to_string())
            }
        }
    }

    fn fake(fail: bool) -> Arc<Fake> {
        Arc::new(Fake { calls: AtomicUsize::new(0), urls: Mutex::new(vec![]), fail })
    }

    #[test]
    fn parses_and_normalises() {
        let rels = parse_response("cat", BODY).unwrap();
        assert_eq!(rels.len(), 2);
        assert_eq!(rels[0].to_term, "rug");
        assert_eq!(rels[0].relation_kind, "at_location");
        assert_eq!(rels[1].to_term, "kitten");
        assert_eq!(rels[1].relation_kind, "related_to");
    }

    #[test]
    fn query_url_shape() {
        let t = fake(false);
        let client = ConceptNetClient::new(t.clone()).with_base_url("http://local/");
        client.related_locations("living room", 3).unwrap();
        let urls = t.urls.lock().unwrap();
        assert_eq!(
            urls[0],
            "http://local/query?node=/c/en/living_room&other=/c/en&limit=50&rel=/r/AtLocation"
        );
    }

    #[test]
    fn cache_avoids_second_call() {
        let dir = tempfile::tempdir().unwrap();
        let t = fake(false);
        let client = ConceptNetClient::new(t.clone())
            .with_base_url("http://local")
            .with_cache(DiskCache::open(dir.path().join("semantic")).unwrap());
        let a = client.related_terms("cat", 5).unwrap();
        let b = client.related_terms("cat", 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(t.calls.load(Ordering::SeqCst), 1);
        client.related_locations("cat", 5).unwrap();
        assert_eq!(t.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn failure_surfaces_and_falls_back() {
        let client = ConceptNetClient::new(fake(true)).with_base_url("http://local");
        assert!(matches!(
            client.related_terms("cat", 5),
            Err(GraphError::SourceUnavailable(_))
        ));
        let mut offline = SemanticGraph::new();
        offline.add("cat", "related_to", "rug", 1.0);
        let both = WithFallback { primary: client, fallback: offline };
        assert_eq!(both.related_terms("cat", 5).unwrap()[0].to_term, "rug");
    }
}
