use std::path::Path;
use std::sync::OnceLock;

use deckforge::assemble::{assemble, AssemblyConfig, AssemblyMode};
use deckforge::chart::renormalize_to_100;
use deckforge::export::{pie_angles, pie_wedge_paths, ANGLE_UNITS_PER_TURN};
use deckforge::grammar::{pluralize, title_case};
use deckforge::manifest::deck_manifest;
use deckforge::model::{validate_deck, Deck, Topic};
use deckforge::rng::{rng_from_seed, roulette};
use deckforge::schema::PresentationSchema;
use deckforge::services::Services;
use proptest::prelude::*;

fn bundled() -> &'static (Services, PresentationSchema) {
    static CELL: OnceLock<(Services, PresentationSchema)> = OnceLock::new();
    CELL.get_or_init(|| {
        let assets = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
        (
            Services::offline(&assets.join("corpus")).unwrap(),
            PresentationSchema::load(&assets.join("schemas/improvised_ted_talk.json")).unwrap(),
        )
    })
}

proptest! {
    #[test]
    fn roulette_only_picks_positive_weights(weights in prop::collection::vec(prop_oneof![Just(0.0), Just(-1.0), 0.001f64..100.0], 0..12), seed: u64) {
        let pick = roulette(&weights, &mut rng_from_seed(seed));
        match pick {
            Some(i) => prop_assert!(weights[i] > 0.0),
            None => prop_assert!(weights.iter().all(|w| *w <= 0.0)),
        }
    }

    #[test]
    fn renormalized_values_sum_to_100(values in prop::collection::vec(0.01f64..1e6, 1..10)) {
        let mut cats: Vec<(String, f64)> = values.iter().enumerate().map(|(i, v)| (i.to_string(), *v)).collect();
        renormalize_to_100(&mut cats);
        let total: f64 = cats.iter().map(|(_, v)| v).sum();
        prop_assert!((total - 100.0).abs() <= 1e-9);
        prop_assert!(cats.iter().all(|(_, v)| *v >= 0.0));
    }

    #[test]
    fn pie_angles_cover_one_turn(values in prop::collection::vec(0.01f64..1e3, 1..10)) {
        let a = pie_angles(&values);
        prop_assert_eq!(a.len(), values.len());
        prop_assert_eq!(a[0].0, 0);
        prop_assert_eq!(a.last().unwrap().1, ANGLE_UNITS_PER_TURN);
        for w in a.windows(2) {
            prop_assert_eq!(w[0].1, w[1].0);
            prop_assert!(w[0].0 <= w[0].1);
        }
        prop_assert_eq!(pie_wedge_paths(&values).len(), values.len());
    }

    #[test]
    fn title_case_is_idempotent(s in "[a-z]{1,8}( [a-z]{1,8}){0,3}") {
        let once = title_case(&s);
        prop_assert_eq!(title_case(&once), once.clone());
        prop_assert_eq!(once.to_lowercase(), s.clone());
        prop_assert!(pluralize(&s).len() > s.len());
    }
}

fn deck_for(topic: &str, n: usize, seed: u64, parallelism: usize) -> Option<Deck> {
    let (services, schema) = bundled();
    let c = AssemblyConfig { n_slides: n, parallelism, max_rounds: 10, master_rng_seed: seed, mode: AssemblyMode::Parallel };
    assemble(&Topic::new(topic).unwrap(), schema, services, &c).ok().map(|a| a.deck)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assembled_decks_are_valid(topic in prop::sample::select(vec!["cat", "coffee", "river", "guitar", "robot", "zebra"]), n in 1usize..16, seed: u64) {
        let (_, schema) = bundled();
        if let Some(deck) = deck_for(topic, n, seed, 3) {
            prop_assert_eq!(deck.len(), n);
            prop_assert_eq!(validate_deck(&deck, schema), vec![]);
            prop_assert_eq!(deck.slides[0].meta.generator.as_str(), "title");
            let manifest = deck_manifest(&deck);
            let back: Deck = serde_json::from_str(&manifest).unwrap();
            prop_assert_eq!(deck_manifest(&back), manifest);
        }
    }

    #[test]
    fn worker_count_is_invisible(seed: u64, n in 2usize..12) {
        let a = deck_for("cat", n, seed, 1).map(|d| deck_manifest(&d));
        let b = deck_for("cat", n, seed, 6).map(|d| deck_manifest(&d));
        prop_assert_eq!(a, b);
    }
}
