//! Everything slide generation reads from: the word web, the grammar and its
//! functions, and the content sources. Loaded once, shared read-only.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

use crate::conceptnet::{ConceptNetClient, WithFallback};
use crate::grammar::{ExpansionBudget, FunctionRegistry, Grammar, GrammarError, NounList};
use crate::graph::{load_graph, GraphError, RelatedTerms, SemanticGraph};
use crate::net::{DiskCache, IoClock, TimedTransport, Transport};
use crate::rng::roulette;
use crate::sources::{ContentSource, Item, SourceError, SourceRegistry};

pub const GRAPH_FILE: &str = "graph.tsv";
pub const GRAMMAR_FILE: &str = "grammar.json";
pub const NOUNS_FILE: &str = "noun_list.txt";
pub const PRONOUNS_FILE: &str = "pronouns.json";
pub const WIKIHOW_SOURCE: &str = "wikihow";

#[derive(Debug, Error)]
pub enum ServicesError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

fn read(path: &Path) -> Result<String, ServicesError> {
    std::fs::read_to_string(path).map_err(|e| ServicesError::Io { path: path.display().to_string(), reason: e.to_string() })
}

pub struct Services {
    pub graph: Arc<dyn RelatedTerms>,
    pub grammar: Arc<Grammar>,
    pub functions: Arc<FunctionRegistry>,
    pub sources: Arc<SourceRegistry>,
    pub budget: ExpansionBudget,
    /// Time spent waiting on remote services.
    pub io_clock: IoClock,
}

impl Services {
    /// Loads a corpus directory with no network access.
    pub fn offline(corpus: &Path) -> Result<Self, ServicesError> {
        let load = load_graph(&corpus.join(GRAPH_FILE))?;
        if !load.rejected.is_empty() {
            log::warn!("{} malformed graph lines skipped", load.rejected.len());
        }
        Self::assemble(corpus, Arc::new(load.graph), IoClock::new())
    }

    /// Like [`Services::offline`], but asks the online word web first and
    /// caches its answers under `cache_dir/semantic`.
    pub fn online(corpus: &Path, cache_dir: &Path, transport: Arc<dyn Transport>) -> Result<Self, ServicesError> {
        let offline = load_graph(&corpus.join(GRAPH_FILE))?.graph;
        let clock = IoClock::new();
        let cache = DiskCache::open(cache_dir.join("semantic"))
            .map_err(|e| ServicesError::Io { path: cache_dir.display().to_string(), reason: e.to_string() })?;
        let timed: Arc<dyn Transport> = Arc::new(TimedTransport::new(transport, clock.clone()));
        let client = ConceptNetClient::new(timed).with_cache(cache);
        Self::assemble(corpus, Arc::new(WithFallback { primary: client, fallback: offline }), clock)
    }

    fn assemble(corpus: &Path, graph: Arc<dyn RelatedTerms>, io_clock: IoClock) -> Result<Self, ServicesError> {
        let grammar = Grammar::parse(&read(&corpus.join(GRAMMAR_FILE))?)?;
        let nouns = match std::fs::read_to_string(corpus.join(NOUNS_FILE)) {
            Ok(t) => NounList::parse(&t),
            Err(_) => NounList::default(),
        };
        let pronouns: HashMap<String, String> = match std::fs::read_to_string(corpus.join(PRONOUNS_FILE)) {
            Ok(t) => serde_json::from_str(&t).map_err(|e| ServicesError::Io {
                path: corpus.join(PRONOUNS_FILE).display().to_string(),
                reason: e.to_string(),
            })?,
            Err(_) => HashMap::new(),
        };
        let sources = Arc::new(SourceRegistry::load(corpus)?);
        let mut functions = FunctionRegistry::with_builtins(nouns, pronouns);
        register_corpus_functions(&mut functions, graph.clone(), &sources)?;
        Ok(Services {
            graph,
            grammar: Arc::new(grammar),
            functions: Arc::new(functions),
            sources,
            budget: ExpansionBudget::default(),
            io_clock,
        })
    }

    /// Services over in-memory parts, for tests and embedding.
    pub fn from_parts(
        graph: SemanticGraph,
        grammar: Grammar,
        functions: FunctionRegistry,
        sources: SourceRegistry,
    ) -> Self {
        Services {
            graph: Arc::new(graph),
            grammar: Arc::new(grammar),
            functions: Arc::new(functions),
            sources: Arc::new(sources),
            budget: ExpansionBudget::default(),
            io_clock: IoClock::new(),
        }
    }

    pub fn corpus_root(&self) -> &Path {
        self.sources.root()
    }

    pub fn resolve(&self, locator: &str) -> PathBuf {
        self.sources.resolve(locator)
    }
}

/// Registers the grammar functions backed by the corpus:
/// `wikihow_action` (a how-to action mentioning the word, failing when there
/// is none), `related_term` and `location` (weighted graph neighbours).
pub fn register_corpus_functions(
    functions: &mut FunctionRegistry,
    graph: Arc<dyn RelatedTerms>,
    sources: &SourceRegistry,
) -> Result<(), GrammarError> {
    if let Ok(wikihow) = sources.content(WIKIHOW_SOURCE) {
        functions.register_transform("wikihow_action", move |s, rng| wikihow_action(wikihow.as_ref(), s, rng))?;
    }
    let g = graph.clone();
    functions.register_transform("related_term", move |s, rng| neighbour(g.as_ref(), s, None, rng))?;
    functions.register_transform("location", move |s, rng| neighbour(graph.as_ref(), s, Some(crate::graph::AT_LOCATION), rng))?;
    Ok(())
}

fn wikihow_action(source: &dyn ContentSource, seed: &str, rng: &mut dyn RngCore) -> Option<String> {
    let f = source.fetch(seed, rng, &Default::default()).ok()?;
    match f.item {
        Item::Text { text } if f.related_to_seed => Some(text),
        _ => None,
    }
}

fn neighbour(graph: &dyn RelatedTerms, term: &str, relation: Option<&str>, rng: &mut dyn RngCore) -> Option<String> {
    let rels = graph.related(&term.to_lowercase(), relation, 50).ok()?;
    let weights: Vec<f64> = rels.iter().map(|r| r.weight).collect();
    roulette(&weights, rng).map(|i| rels[i].to_term.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{expand, ExpansionContext};
    use crate::rng::rng_from_seed;
    use crate::sources::{Flavour, LookupSource, SourceInfo, SourceKind, WikiHowCorpus};

    fn services() -> Services {
        let mut graph = SemanticGraph::new();
        graph.add("cat", "related_to", "rug", 1.0);
        graph.add("fish", "at_location", "aquarium", 1.0);
        let mut sources = SourceRegistry::new(Path::new("."));
        sources
            .insert_content(Arc::new(LookupSource::new(
                SourceInfo::new(WIKIHOW_SOURCE, SourceKind::Text, Flavour::Neutral),
                Arc::new(WikiHowCorpus::parse(WIKIHOW_SOURCE, "How to Pet a Cat\nHow to Tie a Tie\n")),
            )))
            .unwrap();
        let graph = Arc::new(graph);
        let mut functions = FunctionRegistry::with_builtins(NounList::default(), HashMap::new());
        register_corpus_functions(&mut functions, graph.clone(), &sources).unwrap();
        let grammar = Grammar::parse(
            r#"{"talk": ["Why We All Need to {seed.wikihow_action.title}"], "near": ["{seed.related_term}"], "where": ["{seed.location}"]}"#,
        )
        .unwrap();
        Services {
            graph,
            grammar: Arc::new(grammar),
            functions: Arc::new(functions),
            sources: Arc::new(sources),
            budget: ExpansionBudget::default(),
            io_clock: IoClock::new(),
        }
    }

    fn run(s: &Services, rule: &str, seed: &str) -> Result<String, GrammarError> {
        let ctx = ExpansionContext::new(s.functions.clone()).with_var("seed", seed);
        expand(&s.grammar, rule, &ctx, &s.budget, &mut rng_from_seed(1))
    }

    #[test]
    fn worked_title_example() {
        assert_eq!(run(&services(), "talk", "cat").unwrap(), "Why We All Need to Pet a Cat");
    }

    #[test]
    fn unmatched_action_exhausts() {
        assert!(matches!(run(&services(), "talk", "zebra"), Err(GrammarError::ExpansionExhausted { .. })));
    }

    #[test]
    fn graph_functions() {
        let s = services();
        assert_eq!(run(&s, "near", "cat").unwrap(), "rug");
        assert_eq!(run(&s, "where", "fish").unwrap(), "aquarium");
        assert!(run(&s, "where", "cat").is_err());
    }
}
