use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use deckforge::assemble::{assemble, AssemblyConfig, AssemblyMode};
use deckforge::model::{validate_deck, Topic};
use deckforge::schema::PresentationSchema;
use deckforge::services::Services;
use serde_json::Value;

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets")
}

fn raw(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(assets().join(format!("schemas/{name}.json"))).unwrap()).unwrap()
}

fn load(name: &str) -> PresentationSchema {
    PresentationSchema::load(&assets().join(format!("schemas/{name}.json"))).unwrap()
}

fn names(schema: &PresentationSchema) -> BTreeSet<String> {
    schema.generators.iter().map(|g| g.name.clone()).collect()
}

/// Sources, composites and tuples flavoured funny or odd.
fn comedic_sources() -> HashSet<String> {
    let m: Value = serde_json::from_str(&std::fs::read_to_string(assets().join("corpus/sources.json")).unwrap()).unwrap();
    ["sources", "composites", "tuples"]
        .iter()
        .flat_map(|k| m[k].as_array().cloned().unwrap_or_default())
        .filter(|s| matches!(s["flavour"].as_str(), Some("funny" | "odd")))
        .map(|s| s["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn bundled_schemas_validate() {
    for name in ["improvised_ted_talk", "pecha_kucha"] {
        load(name).validate().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    assert_eq!(load("improvised_ted_talk").generators.len(), 26);
}

#[test]
fn pecha_kucha_drops_comedic_generators() {
    let comedic = comedic_sources();
    let ted = raw("improvised_ted_talk");
    let expected: BTreeSet<String> = ted["generators"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|g| {
            !g["bindings"]
                .as_object()
                .unwrap()
                .values()
                .any(|b| b["source"].as_str().is_some_and(|s| comedic.contains(s)))
        })
        .map(|g| g["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(names(&load("pecha_kucha")), expected);
    assert!(expected.len() < 26);
}

#[test]
fn openers_and_front_loaded_slides() {
    let services = Services::offline(&assets().join("corpus")).unwrap();
    for name in ["improvised_ted_talk", "pecha_kucha"] {
        let schema = load(name);
        let early: HashSet<&str> = schema
            .generators
            .iter()
            .filter(|g| g.has_tag("about_me") || g.has_tag("history"))
            .map(|g| g.name.as_str())
            .collect();
        let runs = if name == "pecha_kucha" { 200 } else { 1000 };
        for seed in 0..runs {
            let topic = Topic::new(["cat", "coffee", "river", "guitar", "dog"][seed as usize % 5]).unwrap();
            let c = AssemblyConfig { n_slides: 7, parallelism: 2, max_rounds: 10, master_rng_seed: seed, mode: AssemblyMode::Parallel };
            let Ok(a) = assemble(&topic, &schema, &services, &c) else { continue };
            assert!(validate_deck(&a.deck, &schema).is_empty());
            assert_eq!(a.deck.slides[0].meta.generator, "title", "{name} seed {seed}");
            assert_eq!(a.deck.slides[6].meta.generator, "conclusion", "{name} seed {seed}");
            for (i, s) in a.deck.slides.iter().enumerate() {
                if early.contains(s.meta.generator.as_str()) {
                    assert!((1..=3).contains(&i), "{name} seed {seed}: {} at {i}", s.meta.generator);
                }
            }
        }
    }
}

#[test]
fn worked_title_on_the_bundled_corpus() {
    let services = Services::offline(&assets().join("corpus")).unwrap();
    let ctx = deckforge::grammar::ExpansionContext::new(services.functions.clone()).with_var("seed", "cat");
    let grammar = deckforge::grammar::Grammar::parse(r#"{"t": ["Why We All Need to {seed.wikihow_action.title}"]}"#).unwrap();
    let mut titles = BTreeSet::new();
    for seed in 0..200 {
        let t = deckforge::grammar::expand(&grammar, "t", &ctx, &services.budget, &mut deckforge::rng::rng_from_seed(seed)).unwrap();
        titles.insert(t);
    }
    assert!(titles.contains("Why We All Need to Pet a Cat"), "{titles:?}");
    assert!(titles.iter().all(|t| t.to_lowercase().contains("cat")));
}
