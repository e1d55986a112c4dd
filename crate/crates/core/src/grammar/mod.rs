//! Tracery-style text grammars extended with external variable slots.
//!
//! Rules are a JSON object mapping names to lists of alternatives. An
//! alternative may reference other rules as `#name#` and external variables
//! as `{var.fn1.fn2}`, where each function either transforms the value or,
//! for `is_`-prefixed names, tests it. Expansion first samples the rule tree,
//! then resolves the slots; if any slot fails (missing variable, failed
//! predicate, failed transform) the whole expansion is sampled again.

mod functions;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

pub use functions::{
    gerund, pluralize, title_case, with_article, Function, FunctionKind, FunctionRegistry,
    NounList, PredicateFn, TransformFn, PREDICATE_PREFIX,
};

use crate::rng::pick_index;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("grammar parse error at {location}: {reason}")]
    Parse { location: String, reason: String },
    #[error("rule #{0}# is referenced but not defined")]
    UndefinedRule(String),
    #[error("rule #{0}# has no alternatives")]
    EmptyRule(String),
    #[error("expansion of #{rule}# failed its conditions {attempts} times")]
    ExpansionExhausted { rule: String, attempts: usize },
    #[error("expansion of #{rule}# exceeded depth {max_depth}")]
    DepthExceeded { rule: String, max_depth: usize },
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("function {0:?} is already registered")]
    DuplicateFunction(String),
    #[error("function {0:?}: predicates must be named is_*, transforms must not")]
    FunctionNaming(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Text(String),
    Rule(String),
    Slot { var: String, chain: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    source: String,
    segments: Vec<Segment>,
}

impl Template {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut chars = text.char_indices();
        while let Some((pos, c)) = chars.next() {
            match c {
                '#' => {
                    let name: String = chars.by_ref().map(|(_, c)| c).take_while(|&c| c != '#').collect();
                    if !text[pos + 1..].contains('#') {
                        return Err(format!("unterminated rule reference at offset {pos}"));
                    }
                    if name.is_empty() || name.contains(['{', '}']) {
                        return Err(format!("bad rule reference at offset {pos}"));
                    }
                    flush(&mut literal, &mut segments);
                    segments.push(Segment::Rule(name));
                }
                '{' => {
                    let body: String = chars.by_ref().map(|(_, c)| c).take_while(|&c| c != '}').collect();
                    if !text[pos + 1..].contains('}') {
                        return Err(format!("unterminated slot at offset {pos}"));
                    }
                    let mut parts = body.split('.').map(str::trim);
                    let var = parts.next().unwrap_or("").to_string();
                    let chain: Vec<String> = parts.map(str::to_string).collect();
                    if var.is_empty() || chain.iter().any(|f| f.is_empty()) || body.contains(['{', '#']) {
                        return Err(format!("bad slot {{{body}}} at offset {pos}"));
                    }
                    flush(&mut literal, &mut segments);
                    segments.push(Segment::Slot { var, chain });
                }
                '}' => return Err(format!("unmatched '}}' at offset {pos}")),
                _ => literal.push(c),
            }
        }
        flush(&mut literal, &mut segments);
        Ok(Template { source: text.to_string(), segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

fn flush(literal: &mut String, segments: &mut Vec<Segment>) {
    if !literal.is_empty() {
        segments.push(Segment::Text(std::mem::take(literal)));
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grammar {
    rules: BTreeMap<String, Vec<Template>>,
}

impl Grammar {
    /// Parses a Tracery JSON rule map. Values are a string or a list of strings.
    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| GrammarError::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            reason: e.to_string(),
        })?;
        let serde_json::Value::Object(map) = value else {
            return Err(GrammarError::Parse {
                location: "root".into(),
                reason: "expected a JSON object of rules".into(),
            });
        };
        let mut raw = BTreeMap::new();
        for (name, value) in map {
            let alts = match value {
                serde_json::Value::String(s) => vec![s],
                serde_json::Value::Array(items) => items
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        serde_json::Value::String(s) => Ok(s),
                        _ => Err(GrammarError::Parse {
                            location: format!("rule {name:?} alternative {i}"),
                            reason: "alternatives must be strings".into(),
                        }),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                _ => {
                    return Err(GrammarError::Parse {
                        location: format!("rule {name:?}"),
                        reason: "expected a string or a list of strings".into(),
                    })
                }
            };
            raw.insert(name, alts);
        }
        Self::from_rules(raw)
    }

    pub fn from_rules<K, V, I>(rules: I) -> Result<Self, GrammarError>
    where
        I: IntoIterator<Item = (K, Vec<V>)>,
        K: Into<String>,
        V: AsRef<str>,
    {
        let mut parsed = BTreeMap::new();
        for (name, alts) in rules {
            let name = name.into();
            if alts.is_empty() {
                return Err(GrammarError::EmptyRule(name));
            }
            let templates = alts
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    Template::parse(a.as_ref()).map_err(|reason| GrammarError::Parse {
                        location: format!("rule {name:?} alternative {i}"),
                        reason,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            parsed.insert(name, templates);
        }
        let grammar = Grammar { rules: parsed };
        grammar.check_references()?;
        Ok(grammar)
    }

    fn check_references(&self) -> Result<(), GrammarError> {
        for templates in self.rules.values() {
            for t in templates {
                for seg in &t.segments {
                    if let Segment::Rule(r) = seg {
                        if !self.rules.contains_key(r) {
                            return Err(GrammarError::UndefinedRule(r.clone()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds the rules of `other`, replacing same-named rules.
    pub fn merge(&mut self, other: Grammar) -> Result<(), GrammarError> {
        self.rules.extend(other.rules);
        self.check_references()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn alternatives(&self, rule: &str) -> Option<&[Template]> {
        self.rules.get(rule).map(Vec::as_slice)
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.rules.contains_key(rule)
    }

    pub fn rule_names(&self) -> impl Iterator<Item = &str> {
        self.rules.keys().map(String::as_str)
    }
}

/// External variables plus the functions slots may apply to them.
#[derive(Debug, Clone, Default)]
pub struct ExpansionContext {
    variables: HashMap<String, String>,
    registry: Arc<FunctionRegistry>,
}

impl ExpansionContext {
    pub fn new(registry: Arc<FunctionRegistry>) -> Self {
        ExpansionContext { variables: HashMap::new(), registry }
    }

    /// Empty values are ignored; a slot naming them counts as missing.
    pub fn with_var(mut self, name: &str, value: &str) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: &str) {
        if !value.trim().is_empty() {
            self.variables.insert(name.to_string(), value.to_string());
        }
    }

    pub fn var(&self, name: &str) -> Option<&str> {
        self.variables.get(name).map(String::as_str)
    }

    pub fn registry(&self) -> &FunctionRegistry {
        &self.registry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpansionBudget {
    pub max_attempts: usize,
    pub max_depth: usize,
}

impl Default for ExpansionBudget {
    fn default() -> Self {
        ExpansionBudget { max_attempts: 100, max_depth: 50 }
    }
}

enum Piece<'g> {
    Text(&'g str),
    Slot { var: &'g str, chain: &'g [String] },
}

enum SlotOutcome {
    Retry,
    Fatal(GrammarError),
}

fn sample<'g>(
    grammar: &'g Grammar,
    rule: &str,
    depth: usize,
    budget: &ExpansionBudget,
    rng: &mut dyn RngCore,
    out: &mut Vec<Piece<'g>>,
) -> Result<(), GrammarError> {
    if depth > budget.max_depth {
        return Err(GrammarError::DepthExceeded { rule: rule.to_string(), max_depth: budget.max_depth });
    }
    let alts = grammar
        .rules
        .get(rule)
        .ok_or_else(|| GrammarError::UndefinedRule(rule.to_string()))?;
    let pick = pick_index(alts.len(), rng).ok_or_else(|| GrammarError::EmptyRule(rule.to_string()))?;
    for seg in &alts[pick].segments {
        match seg {
            Segment::Text(t) => out.push(Piece::Text(t)),
            Segment::Rule(r) => sample(grammar, r, depth + 1, budget, rng, out)?,
            Segment::Slot { var, chain } => out.push(Piece::Slot { var, chain }),
        }
    }
    Ok(())
}

fn resolve_slot(
    var: &str,
    chain: &[String],
    ctx: &ExpansionContext,
    rng: &mut dyn RngCore,
) -> Result<String, SlotOutcome> {
    let mut value = ctx.var(var).ok_or(SlotOutcome::Retry)?.to_string();
    for name in chain {
        match ctx.registry.get(name) {
            None => return Err(SlotOutcome::Fatal(GrammarError::UnknownFunction(name.clone()))),
            Some(Function::Predicate(p)) => {
                if !p(&value) {
                    return Err(SlotOutcome::Retry);
                }
            }
            Some(Function::Transform(t)) => match t(&value, rng) {
                Some(v) if !v.trim().is_empty() => value = v,
                _ => return Err(SlotOutcome::Retry),
            },
        }
    }
    Ok(value)
}

/// Expands `rule` into a finished string. See the module docs for the retry
/// semantics.
pub fn expand(
    grammar: &Grammar,
    rule: &str,
    ctx: &ExpansionContext,
    budget: &ExpansionBudget,
    rng: &mut dyn RngCore,
) -> Result<String, GrammarError> {
    if !grammar.rules.contains_key(rule) {
        return Err(GrammarError::UndefinedRule(rule.to_string()));
    }
    'attempt: for _ in 0..budget.max_attempts {
        let mut pieces = Vec::new();
        sample(grammar, rule, 0, budget, rng, &mut pieces)?;
        let mut out = String::new();
        for piece in pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot { var, chain } => match resolve_slot(var, chain, ctx, rng) {
                    Ok(v) => out.push_str(&v),
                    Err(SlotOutcome::Retry) => continue 'attempt,
                    Err(SlotOutcome::Fatal(e)) => return Err(e),
                },
            }
        }
        return Ok(out);
    }
    Err(GrammarError::ExpansionExhausted { rule: rule.to_string(), attempts: budget.max_attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use std::collections::BTreeSet;

    fn ctx_with(seed: &str, nouns: &[&str]) -> ExpansionContext {
        let reg = FunctionRegistry::with_builtins(
            nouns.iter().map(|s| s.to_string()).collect(),
            HashMap::new(),
        );
        ExpansionContext::new(Arc::new(reg)).with_var("seed", seed)
    }

    #[test]
    fn terminal_grammar() {
        let g = Grammar::parse(r#"{"origin":["hello"]}"#).unwrap();
        assert_eq!(g.rule_count(), 1);
        assert_eq!(g.alternatives("origin").unwrap().len(), 1);
        let ctx = ExpansionContext::default();
        for s in 0..10 {
            assert_eq!(
                expand(&g, "origin", &ctx, &ExpansionBudget::default(), &mut rng_from_seed(s)).unwrap(),
                "hello"
            );
        }
    }

    #[test]
    fn reference_grammar_covers_both_outputs() {
        let g = Grammar::parse(r##"{"origin":["#greet# world"],"greet":["hi","hello"]}"##).unwrap();
        assert_eq!(g.rule_count(), 2);
        let ctx = ExpansionContext::default();
        let mut rng = rng_from_seed(5);
        let seen: BTreeSet<String> = (0..200)
            .map(|_| expand(&g, "origin", &ctx, &ExpansionBudget::default(), &mut rng).unwrap())
            .collect();
        let expected: BTreeSet<String> = ["hi world", "hello world"].iter().map(|s| s.to_string()).collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            Grammar::parse(r##"{"origin":["#missing#"]}"##).unwrap_err(),
            GrammarError::UndefinedRule("missing".into())
        );
        assert_eq!(Grammar::parse(r#"{"origin":[]}"#).unwrap_err(), GrammarError::EmptyRule("origin".into()));
        assert!(matches!(Grammar::parse("{\"origin\": "), Err(GrammarError::Parse { .. })));
        assert!(matches!(Grammar::parse(r#"{"origin": 3}"#), Err(GrammarError::Parse { .. })));
        assert!(matches!(Grammar::parse(r##"{"origin": "#open"}"##), Err(GrammarError::Parse { .. })));
        assert!(matches!(Grammar::parse(r#"{"origin": "{seed"}"#), Err(GrammarError::Parse { .. })));
        assert!(matches!(Grammar::parse(r#"{"origin": "{seed..title}"}"#), Err(GrammarError::Parse { .. })));
        assert!(matches!(Grammar::parse(r#"["a"]"#), Err(GrammarError::Parse { .. })));
    }

    #[test]
    fn wikihow_title_example() {
        let g = Grammar::parse(r#"{"origin":["Why We All Need to {seed.wikihow_action.title}"]}"#).unwrap();
        let mut reg = FunctionRegistry::with_builtins(NounList::default(), HashMap::new());
        reg.register_transform("wikihow_action", |s, _| (s == "cat").then(|| "pet a cat".to_string()))
            .unwrap();
        let ctx = ExpansionContext::new(Arc::new(reg)).with_var("seed", "cat");
        let out = expand(&g, "origin", &ctx, &ExpansionBudget::default(), &mut rng_from_seed(0)).unwrap();
        assert_eq!(out, "Why We All Need to Pet a Cat");
    }

    #[test]
    fn predicate_retry_and_exhaustion() {
        let g = Grammar::parse(r#"{"origin":["{seed.is_noun.a_an}"]}"#).unwrap();
        let budget = ExpansionBudget::default();
        let ok = expand(&g, "origin", &ctx_with("cat", &["cat"]), &budget, &mut rng_from_seed(1)).unwrap();
        assert_eq!(ok, "a cat");
        let err = expand(&g, "origin", &ctx_with("run", &["cat"]), &budget, &mut rng_from_seed(1)).unwrap_err();
        assert_eq!(err, GrammarError::ExpansionExhausted { rule: "origin".into(), attempts: 100 });
    }

    #[test]
    fn retry_resamples_whole_expansion() {
        // only the second alternative can succeed for a non-noun seed
        let g = Grammar::parse(r#"{"origin":["{seed.is_noun} fails","{seed.upper} works"]}"#).unwrap();
        let out = expand(&g, "origin", &ctx_with("run", &[]), &ExpansionBudget::default(), &mut rng_from_seed(9)).unwrap();
        assert_eq!(out, "RUN works");
    }

    #[test]
    fn missing_variable_retries_then_exhausts() {
        let g = Grammar::parse(r#"{"origin":["{nope}"]}"#).unwrap();
        let budget = ExpansionBudget { max_attempts: 3, max_depth: 50 };
        let err = expand(&g, "origin", &ctx_with("cat", &[]), &budget, &mut rng_from_seed(1)).unwrap_err();
        assert_eq!(err, GrammarError::ExpansionExhausted { rule: "origin".into(), attempts: 3 });
    }

    #[test]
    fn unknown_function_is_fatal() {
        let g = Grammar::parse(r#"{"origin":["{seed.frobnicate}"]}"#).unwrap();
        let err = expand(&g, "origin", &ctx_with("cat", &[]), &ExpansionBudget::default(), &mut rng_from_seed(1)).unwrap_err();
        assert_eq!(err, GrammarError::UnknownFunction("frobnicate".into()));
    }

    #[test]
    fn depth_limit() {
        let g = Grammar::parse(r##"{"origin":["x#origin#"]}"##).unwrap();
        let err = expand(&g, "origin", &ExpansionContext::default(), &ExpansionBudget::default(), &mut rng_from_seed(1))
            .unwrap_err();
        assert_eq!(err, GrammarError::DepthExceeded { rule: "origin".into(), max_depth: 50 });
    }

    #[test]
    fn register_and_use_custom_functions() {
        let mut reg = FunctionRegistry::new();
        reg.register_transform("upper", |s, _| Some(s.to_uppercase())).unwrap();
        reg.register_predicate("is_short", |s| s.chars().count() <= 4).unwrap();
        assert_eq!(
            reg.register_transform("upper", |s, _| Some(s.into())).unwrap_err(),
            GrammarError::DuplicateFunction("upper".into())
        );
        let ctx = ExpansionContext::new(Arc::new(reg)).with_var("seed", "cat");
        let g = Grammar::parse(r#"{"a":["{seed.upper}"],"b":["{seed.is_short}"]}"#).unwrap();
        let b = ExpansionBudget::default();
        assert_eq!(expand(&g, "a", &ctx, &b, &mut rng_from_seed(0)).unwrap(), "CAT");
        assert_eq!(expand(&g, "b", &ctx, &b, &mut rng_from_seed(0)).unwrap(), "cat");
    }

    #[test]
    fn predicates_never_alter_the_value() {
        let with = Grammar::parse(r#"{"o":["<{seed.is_noun.title.is_noun.plural}>"]}"#).unwrap();
        let without = Grammar::parse(r#"{"o":["<{seed.title.plural}>"]}"#).unwrap();
        let ctx = ctx_with("box", &["box", "Box"]);
        let b = ExpansionBudget::default();
        assert_eq!(
            expand(&with, "o", &ctx, &b, &mut rng_from_seed(3)).unwrap(),
            expand(&without, "o", &ctx, &b, &mut rng_from_seed(3)).unwrap()
        );
    }

    #[test]
    fn determinism() {
        let g = Grammar::parse(r##"{"o":["#a# #a# #a#"],"a":["x","y","z","{seed}"]}"##).unwrap();
        let ctx = ctx_with("cat", &[]);
        let b = ExpansionBudget::default();
        for s in 0..20 {
            assert_eq!(
                expand(&g, "o", &ctx, &b, &mut rng_from_seed(s)),
                expand(&g, "o", &ctx, &b, &mut rng_from_seed(s))
            );
        }
    }
}
