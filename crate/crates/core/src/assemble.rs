//! Deck assembly: seed walk, generator schedule, parallel generation and the
//! validate-and-repair loop.
//!
//! Every slide attempt draws from its own stream `hash64(master, slide,
//! round)`, so results do not depend on worker count or completion order.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{generate_slide, select_generator, GenerationKnowledge, GeneratorError, SlideGeneratorSpec};
use crate::grammar::title_case;
use crate::model::{validate_deck, ContentTally, Deck, FilledContent, PlaceholderKind, Slide, SlideMeta, Tag, Topic, Violation};
use crate::rng::{pick_index, slide_rng, stream_rng, SCHEDULE_STREAM, SEED_WALK_STREAM};
use crate::schema::PresentationSchema;
use crate::seeds::{generate_seeds, SeedSequence};
use crate::services::Services;

pub const FALLBACK_GENERATOR: &str = "fallback_full_image";
pub const FULL_IMAGE_TAG: &str = "full_image";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyMode {
    #[default]
    Parallel,
    Serial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyConfig {
    pub n_slides: usize,
    pub parallelism: usize,
    /// Generation rounds, the first one included.
    pub max_rounds: usize,
    pub master_rng_seed: u64,
    pub mode: AssemblyMode,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            n_slides: 7,
            parallelism: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            max_rounds: 10,
            master_rng_seed: 0,
            mode: AssemblyMode::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round_index: usize,
    pub regenerated_slide_indices: Vec<usize>,
    pub violations_found: Vec<Violation>,
}

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("invalid assembly config: {0}")]
    Config(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error("slide {slide}: {source}")]
    Generation { slide: usize, source: GeneratorError },
    #[error("constraints still violated after {max_rounds} rounds and fallback substitution")]
    Exhausted { max_rounds: usize, reports: Vec<RoundReport>, violations: Vec<Violation> },
    #[error("assembled deck failed validation: {0:?}")]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone)]
pub struct Assembly {
    pub deck: Deck,
    pub reports: Vec<RoundReport>,
    pub seeds: SeedSequence,
    /// Slides replaced by a fallback full-screen image.
    pub fallback_slides: Vec<usize>,
}

struct Plan<'s> {
    seeds: SeedSequence,
    schedule: Vec<&'s SlideGeneratorSpec>,
}

fn plan<'s>(topic: &Topic, schema: &'s PresentationSchema, services: &Services, config: &AssemblyConfig) -> Result<Plan<'s>, AssemblyError> {
    if config.n_slides == 0 {
        return Err(AssemblyError::Config("n_slides must be at least 1".into()));
    }
    if config.max_rounds == 0 {
        return Err(AssemblyError::Config("max_rounds must be at least 1".into()));
    }
    if config.parallelism == 0 {
        return Err(AssemblyError::Config("parallelism must be at least 1".into()));
    }
    schema.validate().map_err(|e| AssemblyError::Schema(e.to_string()))?;
    let n = config.n_slides;
    let seeds = generate_seeds(
        topic,
        n,
        services.graph.as_ref(),
        &schema.seed_generator,
        &mut stream_rng(config.master_rng_seed, SEED_WALK_STREAM),
    );
    let mut rng = stream_rng(config.master_rng_seed, SCHEDULE_STREAM);
    let mut knowledge = GenerationKnowledge::default();
    let mut schedule = Vec::with_capacity(n);
    for i in 0..n {
        let spec = select_generator(schema, i, n, &knowledge, &mut rng)
            .map_err(|source| AssemblyError::Generation { slide: i, source })?;
        knowledge.add_selection(spec);
        schedule.push(spec);
    }
    Ok(Plan { seeds, schedule })
}

/// One attempt at slide `i` in `round`. A tag-cap violation calls for a
/// different generator; anything else retries the same one.
#[allow(clippy::too_many_arguments)]
fn attempt(
    i: usize,
    round: usize,
    spec: &SlideGeneratorSpec,
    reselect: bool,
    plan: &Plan,
    schema: &PresentationSchema,
    services: &Services,
    knowledge: &GenerationKnowledge,
    config: &AssemblyConfig,
) -> Result<Slide, AssemblyError> {
    let n = config.n_slides;
    let mut rng = slide_rng(config.master_rng_seed, i, round);
    let spec = if reselect {
        select_generator(schema, i, n, knowledge, &mut rng).map_err(|source| AssemblyError::Generation { slide: i, source })?
    } else {
        spec
    };
    let template = schema.template(&spec.template_id).ok_or_else(|| AssemblyError::Generation {
        slide: i,
        source: GeneratorError::UnknownTemplate { generator: spec.name.clone(), template: spec.template_id.clone() },
    })?;
    let mut slide = generate_slide(spec, template, &plan.seeds.seeds[i], knowledge, services, &mut rng)
        .map_err(|source| AssemblyError::Generation { slide: i, source })?;
    slide.meta.round = round;
    slide.meta.seed_fallback = plan.seeds.is_fallback(i);
    Ok(slide)
}

fn needs_new_generator(violations: &[Violation]) -> bool {
    violations.iter().any(|v| matches!(v, Violation::TagOverCap { .. }))
}

/// Builds a full-screen image slide from an asset no accepted slide uses.
fn fallback_slide(
    i: usize,
    seed: &str,
    seed_fallback: bool,
    schema: &PresentationSchema,
    services: &Services,
    knowledge: &GenerationKnowledge,
    config: &AssemblyConfig,
) -> Option<Slide> {
    let template = schema
        .generators
        .iter()
        .filter(|g| g.has_tag(FULL_IMAGE_TAG))
        .filter_map(|g| schema.template(&g.template_id))
        .find(|t| {
            t.placeholders.iter().filter(|p| p.kind == PlaceholderKind::Image).count() == 1
                && t.placeholders.iter().all(|p| p.kind != PlaceholderKind::Chart)
        })?;
    let unused: Vec<_> = services
        .sources
        .still_images()
        .into_iter()
        .filter(|a| !knowledge.used_image_asset_ids.contains(&a.asset_id))
        .collect();
    let mut rng = slide_rng(config.master_rng_seed, i, config.max_rounds);
    let asset = unused.get(pick_index(unused.len(), &mut rng as &mut dyn RngCore)?)?.clone();
    let fills = template
        .placeholders
        .iter()
        .map(|p| {
            let content = if p.kind == PlaceholderKind::Image {
                FilledContent::Image { asset: asset.clone() }
            } else {
                FilledContent::Text { text: title_case(seed) }
            };
            (p.id.clone(), content)
        })
        .collect();
    Some(Slide {
        template_id: template.template_id.clone(),
        fills,
        meta: SlideMeta {
            seed: seed.to_string(),
            generator: FALLBACK_GENERATOR.to_string(),
            round: config.max_rounds,
            tags: vec![Tag::new(FULL_IMAGE_TAG).expect("valid tag")],
            seed_fallback,
        },
    })
}

/// Accepted slides in index order, tallied.
fn tally_of(slides: &[Option<Slide>]) -> ContentTally {
    let mut t = ContentTally::default();
    for (i, s) in slides.iter().enumerate() {
        if let Some(s) = s {
            t.add(i, s);
        }
    }
    t
}

fn knowledge_of(slides: &[Option<Slide>]) -> GenerationKnowledge {
    GenerationKnowledge::from_slides(slides.iter().flatten())
}

fn log_report(r: &RoundReport) {
    if log::log_enabled!(log::Level::Info) {
        log::info!("round {}", serde_json::to_string(r).unwrap_or_default());
    }
}

/// Substitutes fallback slides for the still-violating ones, in slide order.
#[allow(clippy::too_many_arguments)]
fn substitute_fallbacks(
    accepted: &mut [Option<Slide>],
    pending: &[(usize, Vec<Violation>)],
    plan: &Plan,
    schema: &PresentationSchema,
    services: &Services,
    config: &AssemblyConfig,
    reports: &[RoundReport],
) -> Result<Vec<usize>, AssemblyError> {
    let n = config.n_slides;
    let mut used = Vec::new();
    for (i, last_violations) in pending {
        let knowledge = knowledge_of(accepted);
        let tally = tally_of(accepted);
        let candidate = fallback_slide(*i, &plan.seeds.seeds[*i], plan.seeds.is_fallback(*i), schema, services, &knowledge, config);
        let violations = match &candidate {
            Some(s) => tally.check(*i, s, schema, n),
            None => last_violations.clone(),
        };
        match candidate {
            Some(s) if violations.is_empty() => {
                log::warn!("slide {i}: substituted a fallback image slide");
                accepted[*i] = Some(s);
                used.push(*i);
            }
            _ => {
                return Err(AssemblyError::Exhausted {
                    max_rounds: config.max_rounds,
                    reports: reports.to_vec(),
                    violations,
                })
            }
        }
    }
    Ok(used)
}

fn finish(
    topic: &Topic,
    schema: &PresentationSchema,
    config: &AssemblyConfig,
    plan: Plan,
    accepted: Vec<Option<Slide>>,
    reports: Vec<RoundReport>,
    fallback_slides: Vec<usize>,
) -> Result<Assembly, AssemblyError> {
    let deck = Deck {
        topic: topic.clone(),
        slides: accepted.into_iter().map(|s| s.expect("every slide accepted")).collect(),
        schema_name: schema.name.clone(),
        master_rng_seed: config.master_rng_seed,
    };
    let violations = validate_deck(&deck, schema);
    if !violations.is_empty() {
        return Err(AssemblyError::Invalid(violations));
    }
    Ok(Assembly { deck, reports, seeds: plan.seeds, fallback_slides })
}

/// Generates all slides at once, then repairs conflicts in rounds: a
/// sequential sweep accepts slides in order against everything accepted so
/// far, and only the violators are regenerated, with knowledge of every
/// accepted slide. Accepted slides are never revisited.
pub fn assemble(
    topic: &Topic,
    schema: &PresentationSchema,
    services: &Services,
    config: &AssemblyConfig,
) -> Result<Assembly, AssemblyError> {
    if config.mode == AssemblyMode::Serial {
        return assemble_serial(topic, schema, services, config);
    }
    let plan = plan(topic, schema, services, config)?;
    let n = config.n_slides;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| AssemblyError::Config(e.to_string()))?;

    let mut accepted: Vec<Option<Slide>> = vec![None; n];
    let mut specs: Vec<&SlideGeneratorSpec> = plan.schedule.clone();
    // (slide, violations that caused the regeneration)
    let mut pending: Vec<(usize, Vec<Violation>)> = (0..n).map(|i| (i, Vec::new())).collect();
    let mut reports = Vec::new();

    for round in 0..config.max_rounds {
        let knowledge = if round == 0 { GenerationKnowledge::default() } else { knowledge_of(&accepted) };
        let fresh: Vec<Result<Slide, AssemblyError>> = pool.install(|| {
            pending
                .par_iter()
                .map(|(i, why)| {
                    attempt(*i, round, specs[*i], needs_new_generator(why), &plan, schema, services, &knowledge, config)
                })
                .collect()
        });
        let mut tally = tally_of(&accepted);
        let mut still = Vec::new();
        let mut found = Vec::new();
        for ((i, _), slide) in pending.iter().zip(fresh) {
            let slide = slide?;
            let v = tally.check(*i, &slide, schema, n);
            if v.is_empty() {
                tally.add(*i, &slide);
                accepted[*i] = Some(slide);
            } else {
                if let Some(spec) = schema.generator(&slide.meta.generator) {
                    specs[*i] = spec;
                }
                found.extend(v.iter().cloned());
                still.push((*i, v));
            }
        }
        let report = RoundReport {
            round_index: round,
            regenerated_slide_indices: if round == 0 { Vec::new() } else { pending.iter().map(|(i, _)| *i).collect() },
            violations_found: found,
        };
        log_report(&report);
        reports.push(report);
        pending = still;
        if pending.is_empty() {
            break;
        }
    }

    let fallback_slides = substitute_fallbacks(&mut accepted, &pending, &plan, schema, services, config, &reports)?;
    finish(topic, schema, config, plan, accepted, reports, fallback_slides)
}

/// Reference implementation: slides are produced one at a time in order.
/// Each slide's first attempt is made without knowledge, as in the parallel
/// first round; a violating slide is regenerated with knowledge of the
/// slides before it.
#[allow(clippy::needless_range_loop)]
pub fn assemble_serial(
    topic: &Topic,
    schema: &PresentationSchema,
    services: &Services,
    config: &AssemblyConfig,
) -> Result<Assembly, AssemblyError> {
    let plan = plan(topic, schema, services, config)?;
    let n = config.n_slides;
    let mut accepted: Vec<Option<Slide>> = vec![None; n];
    let mut reports: Vec<RoundReport> = (0..config.max_rounds)
        .map(|r| RoundReport { round_index: r, regenerated_slide_indices: Vec::new(), violations_found: Vec::new() })
        .collect();
    let mut pending = Vec::new();

    for i in 0..n {
        let mut tally = tally_of(&accepted);
        let mut spec = plan.schedule[i];
        let mut why: Vec<Violation> = Vec::new();
        let mut done = false;
        for round in 0..config.max_rounds {
            let knowledge = if round == 0 { GenerationKnowledge::default() } else { knowledge_of(&accepted) };
            let slide = attempt(i, round, spec, needs_new_generator(&why), &plan, schema, services, &knowledge, config)?;
            if round > 0 {
                reports[round].regenerated_slide_indices.push(i);
            }
            let v = tally.check(i, &slide, schema, n);
            if v.is_empty() {
                tally.add(i, &slide);
                accepted[i] = Some(slide);
                done = true;
                break;
            }
            if let Some(s) = schema.generator(&slide.meta.generator) {
                spec = s;
            }
            reports[round].violations_found.extend(v.iter().cloned());
            why = v;
        }
        if !done {
            pending.push((i, why));
        }
    }
    let last_used = reports
        .iter()
        .rposition(|r| r.round_index == 0 || !r.regenerated_slide_indices.is_empty())
        .unwrap_or(0);
    reports.truncate(last_used + 1);
    for r in &reports {
        log_report(r);
    }

    let fallback_slides = substitute_fallbacks(&mut accepted, &pending, &plan, schema, services, config, &reports)?;
    finish(topic, schema, config, plan, accepted, reports, fallback_slides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{FunctionRegistry, Grammar, NounList};
    use crate::graph::SemanticGraph;
    use crate::manifest::deck_manifest;
    use crate::sources::SourceRegistry;
    use std::collections::HashMap;
    use std::path::Path;

    const SCHEMA: &str = r#"{
      "name": "pics",
      "seed_generator": {"min_gap": 3, "max_gap": 6},
      "templates": [
        {"template_id": "text", "placeholders": [
          {"id": "title", "kind": "title_text", "frame": {"x": 0.1, "y": 0.1, "width": 0.8, "height": 0.2}}]},
        {"template_id": "pic", "placeholders": [
          {"id": "title", "kind": "title_text", "frame": {"x": 0.1, "y": 0.05, "width": 0.8, "height": 0.15}},
          {"id": "image", "kind": "image", "frame": {"x": 0.1, "y": 0.25, "width": 0.8, "height": 0.7}}]}
      ],
      "generators": [
        {"name": "title", "template_id": "text", "tags": ["title"], "weight_fn": {"curve": "only_first"},
         "bindings": {"title": {"type": "literal", "text": "Hello"}}},
        {"name": "pic", "template_id": "pic", "tags": ["full_image"], "weight_fn": {"curve": "flat"},
         "bindings": {"title": {"type": "literal", "text": "Look"}, "image": {"type": "image", "source": "main"}}}
      ]
    }"#;

    /// A corpus with `main` images for the generators and `spare` images
    /// only the fallback can reach.
    fn services(dir: &Path, main: usize, spare: usize) -> Services {
        let mut sources = vec![r#"{"name": "main", "kind": "image", "path": "main"}"#.to_string()];
        for (name, count) in [("main", main), ("spare", spare)] {
            std::fs::create_dir_all(dir.join(name)).unwrap();
            for k in 0..count {
                std::fs::write(dir.join(name).join(format!("img{k}.png")), b"png").unwrap();
            }
        }
        if spare > 0 {
            sources.push(r#"{"name": "spare", "kind": "image", "path": "spare"}"#.to_string());
        }
        std::fs::write(dir.join("sources.json"), format!(r#"{{"sources": [{}]}}"#, sources.join(","))).unwrap();
        Services::from_parts(
            SemanticGraph::new(),
            Grammar::parse("{}").unwrap(),
            FunctionRegistry::with_builtins(NounList::default(), HashMap::new()),
            SourceRegistry::load(dir).unwrap(),
        )
    }

    fn config(n: usize, rounds: usize, parallelism: usize, seed: u64) -> AssemblyConfig {
        AssemblyConfig { n_slides: n, parallelism, max_rounds: rounds, master_rng_seed: seed, mode: AssemblyMode::Parallel }
    }

    fn schema() -> PresentationSchema {
        PresentationSchema::from_json(SCHEMA).unwrap()
    }

    fn cat() -> Topic {
        Topic::new("cat").unwrap()
    }

    #[test]
    fn single_slide_deck() {
        let dir = tempfile::tempdir().unwrap();
        let s = services(dir.path(), 2, 0);
        let a = assemble(&cat(), &schema(), &s, &config(1, 3, 2, 9)).unwrap();
        assert_eq!(a.deck.len(), 1);
        assert_eq!(a.deck.slides[0].meta.generator, "title");
        assert_eq!(a.deck.slides[0].meta.seed, "cat");
        assert_eq!(a.reports.len(), 1);
        assert!(a.reports[0].violations_found.is_empty());
    }

    #[test]
    fn zero_sizes_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = services(dir.path(), 2, 0);
        for c in [config(0, 3, 1, 0), config(3, 0, 1, 0), config(3, 3, 0, 0)] {
            assert!(matches!(assemble(&cat(), &schema(), &s, &c), Err(AssemblyError::Config(_))));
        }
    }

    /// One image for two picture slides: slide 1 keeps it, slide 2 collides
    /// in every round, and nothing is left for a fallback.
    #[test]
    fn single_asset_trace() {
        let dir = tempfile::tempdir().unwrap();
        let s = services(dir.path(), 1, 0);
        let dup = Violation::DuplicateImage { asset_id: "main:main/img0.png".into(), first_slide: 1, slide: 2 };
        let expected = vec![
            RoundReport { round_index: 0, regenerated_slide_indices: vec![], violations_found: vec![dup.clone()] },
            RoundReport { round_index: 1, regenerated_slide_indices: vec![2], violations_found: vec![dup.clone()] },
            RoundReport { round_index: 2, regenerated_slide_indices: vec![2], violations_found: vec![dup.clone()] },
        ];
        for mode in [AssemblyMode::Parallel, AssemblyMode::Serial] {
            let c = AssemblyConfig { mode, ..config(3, 3, 2, 5) };
            match assemble(&cat(), &schema(), &s, &c) {
                Err(AssemblyError::Exhausted { max_rounds, reports, violations }) => {
                    assert_eq!(max_rounds, 3);
                    assert_eq!(reports, expected, "{mode:?}");
                    assert_eq!(violations, vec![dup.clone()]);
                }
                other => panic!("{mode:?}: expected exhaustion, got {other:?}"),
            }
        }
    }

    #[test]
    fn fallback_uses_an_unused_image() {
        let dir = tempfile::tempdir().unwrap();
        let s = services(dir.path(), 1, 1);
        let a = assemble(&cat(), &schema(), &s, &config(3, 2, 2, 5)).unwrap();
        assert_eq!(a.fallback_slides, vec![2]);
        let last = &a.deck.slides[2];
        assert_eq!(last.meta.generator, FALLBACK_GENERATOR);
        assert_eq!(last.meta.round, 2);
        assert_eq!(last.image_assets().next().unwrap().asset_id, "spare:spare/img0.png");
        assert!(validate_deck(&a.deck, &schema()).is_empty());
    }

    #[test]
    fn worker_count_does_not_matter() {
        let dir = tempfile::tempdir().unwrap();
        let s = services(dir.path(), 6, 4);
        for seed in 0..10 {
            let runs: Vec<String> = [1, 4, 8]
                .iter()
                .map(|p| deck_manifest(&assemble(&cat(), &schema(), &s, &config(7, 10, *p, seed)).unwrap().deck))
                .collect();
            assert_eq!(runs[0], runs[1], "seed {seed}");
            assert_eq!(runs[0], runs[2], "seed {seed}");
        }
    }

    /// More rounds never make things worse: earlier rounds replay exactly,
    /// and the slides needing a fallback can only shrink.
    #[test]
    fn more_rounds_monotone() {
        let dir = tempfile::tempdir().unwrap();
        let s = services(dir.path(), 5, 6);
        for seed in 0..8 {
            let runs: Vec<Assembly> =
                (1..=6).map(|r| assemble(&cat(), &schema(), &s, &config(7, r, 4, seed)).unwrap()).collect();
            for w in runs.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                assert_eq!(a.reports[..], b.reports[..a.reports.len()], "seed {seed}");
                assert!(b.fallback_slides.iter().all(|i| a.fallback_slides.contains(i)), "seed {seed}");
                if a.fallback_slides.is_empty() {
                    assert_eq!(deck_manifest(&a.deck), deck_manifest(&b.deck), "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn serial_matches_parallel_without_second_order_collisions() {
        let dir = tempfile::tempdir().unwrap();
        let s = services(dir.path(), 40, 0);
        let mut same = 0;
        for seed in 0..20 {
            let p = assemble(&cat(), &schema(), &s, &config(7, 10, 4, seed)).unwrap();
            let q = assemble(&cat(), &schema(), &s, &AssemblyConfig { mode: AssemblyMode::Serial, ..config(7, 10, 4, seed) }).unwrap();
            same += usize::from(deck_manifest(&p.deck) == deck_manifest(&q.deck));
        }
        assert!(same >= 18, "{same}/20");
    }
}
