//! Related-word lookup over a semantic word web.
//!
//! The offline graph is read from a TSV file with one directed edge per line:
//!
//! ```text
//! # from    relation      to      weight
//! cat       related_to    rug     1.0
//! fish      at_location   aquarium 2.0
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RELATED_TO: &str = "related_to";
pub const AT_LOCATION: &str = "at_location";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read graph file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("graph line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("semantic service unavailable: {0}")]
    SourceUnavailable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub from_term: String,
    pub relation_kind: String,
    pub to_term: String,
    pub weight: f64,
}

/// Anything that can answer "which words relate to this one".
pub trait RelatedTerms: Send + Sync {
    /// Relations leaving `term`, optionally restricted to one relation kind,
    /// sorted by descending weight then ascending `to_term`, self-loops removed,
    /// truncated to `limit`.
    fn related(
        &self,
        term: &str,
        relation: Option<&str>,
        limit: usize,
    ) -> Result<Vec<Relation>, GraphError>;

    fn related_terms(&self, term: &str, limit: usize) -> Result<Vec<Relation>, GraphError> {
        self.related(term, None, limit)
    }

    fn related_locations(&self, term: &str, limit: usize) -> Result<Vec<Relation>, GraphError> {
        self.related(term, Some(AT_LOCATION), limit)
    }
}

/// Sorts, filters and truncates a relation list into lookup order.
pub fn rank_relations(term: &str, mut rels: Vec<Relation>, relation: Option<&str>, limit: usize) -> Vec<Relation> {
    rels.retain(|r| r.to_term != term && relation.is_none_or(|k| r.relation_kind == k));
    rels.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then_with(|| a.to_term.cmp(&b.to_term))
            .then_with(|| a.relation_kind.cmp(&b.relation_kind))
    });
    rels.truncate(limit);
    rels
}

#[derive(Debug, Default, Clone)]
pub struct SemanticGraph {
    adjacency: HashMap<String, Vec<Relation>>,
    edge_count: usize,
}

/// Result of reading a graph file: every parseable edge plus the rejected rows.
#[derive(Debug)]
pub struct GraphLoad {
    pub graph: SemanticGraph,
    pub rejected: Vec<GraphError>,
}

impl SemanticGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, from: &str, relation: &str, to: &str, weight: f64) {
        let from = from.trim().to_lowercase();
        let rel = Relation {
            from_term: from.clone(),
            relation_kind: relation.trim().to_string(),
            to_term: to.trim().to_lowercase(),
            weight,
        };
        self.adjacency.entry(from).or_default().push(rel);
        self.edge_count += 1;
    }

    pub fn term_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn parse(text: &str) -> GraphLoad {
        let mut graph = SemanticGraph::new();
        let mut rejected = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            match parse_edge(line) {
                Ok((from, rel, to, w)) => graph.add(from, rel, to, w),
                Err(reason) => rejected.push(GraphError::Parse { line: line_no, reason }),
            }
        }
        GraphLoad { graph, rejected }
    }
}

fn parse_edge(line: &str) -> Result<(&str, &str, &str, f64), String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 4 {
        return Err(format!("expected 4 tab-separated columns, found {}", cols.len()));
    }
    let (from, rel, to) = (cols[0].trim(), cols[1].trim(), cols[2].trim());
    if from.is_empty() || rel.is_empty() || to.is_empty() {
        return Err("empty term or relation".into());
    }
    let weight: f64 = cols[3]
        .trim()
        .parse()
        .map_err(|_| format!("weight {:?} is not a number", cols[3]))?;
    if !weight.is_finite() || weight < 0.0 {
        return Err(format!("weight {weight} must be finite and non-negative"));
    }
    Ok((from, rel, to, weight))
}

pub fn load_graph(path: &Path) -> Result<GraphLoad, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(SemanticGraph::parse(&text))
}

impl RelatedTerms for SemanticGraph {
    fn related(
        &self,
        term: &str,
        relation: Option<&str>,
        limit: usize,
    ) -> Result<Vec<Relation>, GraphError> {
        let rels = self.adjacency.get(term).cloned().unwrap_or_default();
        Ok(rank_relations(term, rels, relation, limit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> SemanticGraph {
        SemanticGraph::parse(
            "# comment\n\
             cat\trelated_to\trug\t1.0\n\
             cat\trelated_to\tmouse\t2.0\n\
             cat\trelated_to\tcat\t9.0\n\
             fish\tat_location\taquarium\t1.0\n\
             fish\trelated_to\twater\t3.0\n\
             sun\trelated_to\tlight\t3.0\n\
             sun\trelated_to\tsky\t2.0\n\
             sun\trelated_to\tbeach\t1.0\n",
        )
        .graph
    }

    #[test]
    fn cat_relates_to_rug() {
        let load = SemanticGraph::parse("cat\trelated_to\trug\t1.0\n");
        assert!(load.rejected.is_empty());
        let rels = load.graph.related_terms("cat", 5).unwrap();
        assert!(rels.iter().any(|r| r.to_term == "rug"));
    }

    #[test]
    fn empty_file() {
        let load = SemanticGraph::parse("");
        assert_eq!(load.graph.term_count(), 0);
        assert_eq!(load.graph.edge_count(), 0);
    }

    #[test]
    fn malformed_line_reported_with_number() {
        let load = SemanticGraph::parse(
            "a\trelated_to\tb\t1\nb\trelated_to\tc\t1\nc\trelated_to\td\t1\nbroken line\n",
        );
        assert_eq!(load.graph.edge_count(), 3);
        assert_eq!(load.rejected.len(), 1);
        assert!(matches!(load.rejected[0], GraphError::Parse { line: 4, .. }));
    }

    #[test]
    fn negative_weight_rejected() {
        let load = SemanticGraph::parse("a\trelated_to\tb\t-1\n");
        assert_eq!(load.graph.edge_count(), 0);
        assert_eq!(load.rejected.len(), 1);
    }

    #[test]
    fn ordering_and_limit() {
        let g = fixture();
        let top: Vec<_> = g.related_terms("sun", 2).unwrap().into_iter().map(|r| r.to_term).collect();
        assert_eq!(top, ["light", "sky"]);
        assert!(g.related_terms("unknown", 5).unwrap().is_empty());
        // self-loop excluded even though it carries the highest weight
        let cat: Vec<_> = g.related_terms("cat", 5).unwrap().into_iter().map(|r| r.to_term).collect();
        assert_eq!(cat, ["mouse", "rug"]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let g = SemanticGraph::parse("a\trelated_to\tzeta\t1\na\trelated_to\talpha\t1\na\trelated_to\tmid\t1\n").graph;
        let terms: Vec<_> = g.related_terms("a", 3).unwrap().into_iter().map(|r| r.to_term).collect();
        assert_eq!(terms, ["alpha", "mid", "zeta"]);
    }

    #[test]
    fn locations_filter() {
        let g = fixture();
        let locs: Vec<_> = g.related_locations("fish", 5).unwrap().into_iter().map(|r| r.to_term).collect();
        assert_eq!(locs, ["aquarium"]);
        assert!(g.related_locations("sun", 5).unwrap().is_empty());
        assert!(g.related_locations("fish", 0).unwrap().is_empty());
    }

    #[test]
    fn load_missing_file_is_io_error() {
        let err = load_graph(Path::new("/nonexistent/graph.tsv")).unwrap_err();
        assert!(matches!(err, GraphError::Io { .. }));
    }

    proptest::proptest! {
        #[test]
        fn lookups_are_prefix_stable(edges in proptest::collection::vec((0u8..6, 0u8..6, 0u32..5), 0..40), k in 0usize..8) {
            let mut g = SemanticGraph::new();
            for (a, b, w) in &edges {
                g.add(&format!("t{a}"), RELATED_TO, &format!("t{b}"), *w as f64);
            }
            for t in 0..6 {
                let term = format!("t{t}");
                let short = g.related_terms(&term, k).unwrap();
                let long = g.related_terms(&term, k + 1).unwrap();
                proptest::prop_assert!(long.starts_with(&short));
                proptest::prop_assert!(short.iter().all(|r| r.to_term != r.from_term));
                proptest::prop_assert_eq!(&short, &g.related_terms(&term, k).unwrap());
            }
        }
    }
}
