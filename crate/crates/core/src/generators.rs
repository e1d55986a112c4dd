//! Slide generators: position weights, roulette scheduling under tag caps,
//! and template filling from bound sources, grammar rules and chart recipes.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{gen_location_chart, gen_scatter, gen_yesno_chart, ChartKind, CurveKind, ScatterParams};
use crate::grammar::{expand, ExpansionContext, GrammarError};
use crate::model::{FilledContent, Slide, SlideMeta, SlideTemplate, Tag};
use crate::rng::roulette;
use crate::schema::PresentationSchema;
use crate::services::Services;
use crate::sources::{ContentSource, Fetched, Item, SourceError};

/// Local refetches allowed when an image collides with one already used.
pub const IMAGE_RETRY_BUDGET: usize = 3;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightFunction {
    OnlyFirst {
        #[serde(default = "one")]
        level: f64,
    },
    OnlyLast {
        #[serde(default = "one")]
        level: f64,
    },
    /// `level` on interior positions `peak_start..=peak_end`, then decaying
    /// geometrically by `decay` per position up to `cutoff`, zero beyond.
    FrontLoaded {
        peak_start: usize,
        peak_end: usize,
        #[serde(default = "one")]
        level: f64,
        decay: f64,
        cutoff: Option<usize>,
    },
    Flat {
        #[serde(default = "one")]
        level: f64,
    },
    /// `level` everywhere except the first and last slide.
    InteriorFlat {
        #[serde(default = "one")]
        level: f64,
    },
}

impl WeightFunction {
    pub fn is_valid(&self) -> bool {
        let level_ok = |l: &f64| l.is_finite() && *l >= 0.0;
        match self {
            WeightFunction::OnlyFirst { level }
            | WeightFunction::OnlyLast { level }
            | WeightFunction::Flat { level }
            | WeightFunction::InteriorFlat { level } => level_ok(level),
            WeightFunction::FrontLoaded { peak_start, peak_end, level, decay, cutoff } => {
                level_ok(level)
                    && peak_start <= peak_end
                    && decay.is_finite()
                    && (0.0..=1.0).contains(decay)
                    && cutoff.is_none_or(|c| c >= *peak_end)
            }
        }
    }

    pub fn eval(&self, position: usize, total: usize) -> f64 {
        let first = position == 0;
        let last = position + 1 == total;
        let w = match *self {
            WeightFunction::OnlyFirst { level } => if first { level } else { 0.0 },
            WeightFunction::OnlyLast { level } => if last { level } else { 0.0 },
            WeightFunction::Flat { level } => level,
            WeightFunction::InteriorFlat { level } => if first || last { 0.0 } else { level },
            WeightFunction::FrontLoaded { peak_start, peak_end, level, decay, cutoff } => {
                if first || last || position < peak_start || cutoff.is_some_and(|c| position > c) {
                    0.0
                } else if position <= peak_end {
                    level
                } else {
                    level * decay.powi((position - peak_end) as i32)
                }
            }
        };
        if w.is_finite() && w > 0.0 { w } else { 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TupleField {
    Caption,
    Content,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartRecipe {
    YesNo { kind: ChartKind },
    Location { kind: ChartKind },
    Scatter {
        curve: CurveKind,
        #[serde(default)]
        noise_sigma: f64,
        #[serde(default = "twenty")]
        n: usize,
    },
}

fn twenty() -> usize {
    20
}

/// Where a placeholder's content comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Binding {
    Grammar { rule: String },
    Text { source: String },
    Image { source: String },
    /// One field of one part of a tupled source; all bindings to the same
    /// source share a single joint fetch per slide.
    Tuple { source: String, part: usize, field: TupleField },
    Chart { chart: ChartRecipe },
    Literal { text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlideGeneratorSpec {
    pub name: String,
    pub template_id: String,
    pub tags: Vec<Tag>,
    pub weight_fn: WeightFunction,
    pub bindings: BTreeMap<String, Binding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_per_deck: Option<u32>,
}

impl SlideGeneratorSpec {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t.as_str() == tag)
    }
}

/// What earlier (or already accepted) slides have used up.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenerationKnowledge {
    pub used_image_asset_ids: HashSet<String>,
    pub tag_counts: HashMap<Tag, usize>,
    pub generator_counts: HashMap<String, usize>,
    pub prior_slide_seeds: Vec<String>,
}

impl GenerationKnowledge {
    pub fn add_slide(&mut self, slide: &Slide) {
        for a in slide.image_assets() {
            self.used_image_asset_ids.insert(a.asset_id.clone());
        }
        let distinct: HashSet<&Tag> = slide.meta.tags.iter().collect();
        for t in distinct {
            *self.tag_counts.entry(t.clone()).or_insert(0) += 1;
        }
        *self.generator_counts.entry(slide.meta.generator.clone()).or_insert(0) += 1;
        self.prior_slide_seeds.push(slide.meta.seed.clone());
    }

    /// Records a scheduled generator before its slide exists.
    pub fn add_selection(&mut self, spec: &SlideGeneratorSpec) {
        let distinct: HashSet<&Tag> = spec.tags.iter().collect();
        for t in distinct {
            *self.tag_counts.entry(t.clone()).or_insert(0) += 1;
        }
        *self.generator_counts.entry(spec.name.clone()).or_insert(0) += 1;
    }

    pub fn from_slides<'a>(slides: impl IntoIterator<Item = &'a Slide>) -> Self {
        let mut k = Self::default();
        for s in slides {
            k.add_slide(s);
        }
        k
    }
}

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("no admissible slide generator for position {0}")]
    NoAdmissibleGenerator(usize),
    #[error("generator {generator} uses unknown template {template}")]
    UnknownTemplate { generator: String, template: String },
    #[error("generator {generator}, seed {seed:?}, placeholder {placeholder}: {source}")]
    Source { generator: String, seed: String, placeholder: String, source: Box<SourceError> },
    #[error("generator {generator}, seed {seed:?}, placeholder {placeholder}: {source}")]
    Grammar { generator: String, seed: String, placeholder: String, source: Box<GrammarError> },
    #[error("generator {generator}, placeholder {placeholder}: {reason}")]
    Binding { generator: String, placeholder: String, reason: String },
}

pub fn eval_weight(spec: &SlideGeneratorSpec, position: usize, total: usize) -> f64 {
    spec.weight_fn.eval(position, total)
}

/// Whether `spec` can still be scheduled given what is already in the deck.
pub fn is_admissible(
    spec: &SlideGeneratorSpec,
    schema: &PresentationSchema,
    total: usize,
    knowledge: &GenerationKnowledge,
) -> bool {
    let under_limit = spec
        .max_per_deck
        .is_none_or(|m| knowledge.generator_counts.get(&spec.name).copied().unwrap_or(0) < m as usize);
    let tags: HashSet<&Tag> = spec.tags.iter().collect();
    under_limit
        && tags.into_iter().all(|t| {
            schema
                .tag_allowance(t, total)
                .is_none_or(|allowed| knowledge.tag_counts.get(t).copied().unwrap_or(0) < allowed)
        })
}

/// Roulette-wheel choice among admissible generators with positive weight.
/// At the first (last) position, generators whose curve is reserved for
/// that position take precedence over everything else.
pub fn select_generator<'s>(
    schema: &'s PresentationSchema,
    position: usize,
    total: usize,
    knowledge: &GenerationKnowledge,
    rng: &mut dyn RngCore,
) -> Result<&'s SlideGeneratorSpec, GeneratorError> {
    let candidates: Vec<(&SlideGeneratorSpec, f64)> = schema
        .generators
        .iter()
        .filter(|g| is_admissible(g, schema, total, knowledge))
        .map(|g| (g, eval_weight(g, position, total)))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let reserved = |g: &SlideGeneratorSpec| {
        (position == 0 && matches!(g.weight_fn, WeightFunction::OnlyFirst { .. }))
            || (position > 0 && position + 1 == total && matches!(g.weight_fn, WeightFunction::OnlyLast { .. }))
    };
    let pool: Vec<(&SlideGeneratorSpec, f64)> = if candidates.iter().any(|(g, _)| reserved(g)) {
        candidates.into_iter().filter(|(g, _)| reserved(g)).collect()
    } else {
        candidates
    };
    let weights: Vec<f64> = pool.iter().map(|(_, w)| *w).collect();
    roulette(&weights, rng)
        .map(|i| pool[i].0)
        .ok_or(GeneratorError::NoAdmissibleGenerator(position))
}

struct SlideFill<'a> {
    spec: &'a SlideGeneratorSpec,
    seed: &'a str,
    services: &'a Services,
    knowledge: &'a GenerationKnowledge,
    local_images: HashSet<String>,
    tuples: HashMap<String, Vec<(String, Fetched)>>,
    extra_tags: Vec<Tag>,
}

impl SlideFill<'_> {
    fn source_err(&self, placeholder: &str, source: SourceError) -> GeneratorError {
        GeneratorError::Source {
            generator: self.spec.name.clone(),
            seed: self.seed.to_string(),
            placeholder: placeholder.to_string(),
            source: Box::new(source),
        }
    }

    fn exclusions(&self) -> HashSet<String> {
        self.knowledge.used_image_asset_ids.union(&self.local_images).cloned().collect()
    }

    fn note(&mut self, f: &Fetched) {
        if let Some(id) = f.item.asset_id() {
            self.local_images.insert(id.to_string());
        }
        self.extra_tags.extend(f.tags.iter().cloned());
    }

    fn content(&self, placeholder: &str, name: &str) -> Result<std::sync::Arc<dyn ContentSource>, GeneratorError> {
        self.services.sources.content(name).map_err(|e| self.source_err(placeholder, e))
    }

    fn fill(&mut self, placeholder: &str, binding: &Binding, rng: &mut dyn RngCore) -> Result<FilledContent, GeneratorError> {
        match binding {
            Binding::Literal { text } => Ok(FilledContent::Text { text: text.clone() }),
            Binding::Grammar { rule } => {
                let ctx = ExpansionContext::new(self.services.functions.clone()).with_var("seed", self.seed);
                let text = expand(&self.services.grammar, rule, &ctx, &self.services.budget, rng).map_err(|source| {
                    GeneratorError::Grammar {
                        generator: self.spec.name.clone(),
                        seed: self.seed.to_string(),
                        placeholder: placeholder.to_string(),
                        source: Box::new(source),
                    }
                })?;
                Ok(FilledContent::Text { text })
            }
            Binding::Text { source } => {
                let src = self.content(placeholder, source)?;
                let f = src.fetch(self.seed, rng, &HashSet::new()).map_err(|e| self.source_err(placeholder, e))?;
                self.note(&f);
                match f.item {
                    Item::Text { text } if !text.trim().is_empty() => Ok(FilledContent::Text { text }),
                    _ => Err(self.source_err(placeholder, SourceError::SourceEmpty(source.clone()))),
                }
            }
            Binding::Image { source } => {
                let src = self.content(placeholder, source)?;
                let mut f;
                let mut tries = 0;
                loop {
                    let exclude = self.exclusions();
                    f = src.fetch(self.seed, rng, &exclude).map_err(|e| self.source_err(placeholder, e))?;
                    let collides = f.item.asset_id().is_some_and(|id| exclude.contains(id));
                    if !collides || tries == IMAGE_RETRY_BUDGET {
                        break;
                    }
                    tries += 1;
                }
                self.note(&f);
                match f.item {
                    Item::Image { asset } => Ok(FilledContent::Image { asset }),
                    Item::Text { .. } => Err(GeneratorError::Binding {
                        generator: self.spec.name.clone(),
                        placeholder: placeholder.to_string(),
                        reason: format!("source {source} returned text for an image slot"),
                    }),
                }
            }
            Binding::Tuple { source, part, field } => {
                if !self.tuples.contains_key(source) {
                    let parts = self.fetch_tuple(placeholder, source, rng)?;
                    for (_, f) in &parts {
                        self.note(f);
                    }
                    self.tuples.insert(source.clone(), parts);
                }
                let parts = &self.tuples[source];
                let Some((caption, fetched)) = parts.get(*part) else {
                    return Err(GeneratorError::Binding {
                        generator: self.spec.name.clone(),
                        placeholder: placeholder.to_string(),
                        reason: format!("tuple {source} has no part {part}"),
                    });
                };
                Ok(match (field, &fetched.item) {
                    (TupleField::Caption, _) => FilledContent::Text { text: caption.clone() },
                    (TupleField::Content, Item::Text { text }) => FilledContent::Text { text: text.clone() },
                    (TupleField::Content, Item::Image { asset }) => FilledContent::Image { asset: asset.clone() },
                })
            }
            Binding::Chart { chart } => {
                let s = self.services;
                let spec = match chart {
                    ChartRecipe::YesNo { kind } => {
                        let ctx = ExpansionContext::new(s.functions.clone()).with_var("seed", self.seed);
                        gen_yesno_chart(*kind, &s.grammar, &ctx, &s.budget, rng).map_err(|source| {
                            GeneratorError::Grammar {
                                generator: self.spec.name.clone(),
                                seed: self.seed.to_string(),
                                placeholder: placeholder.to_string(),
                                source: Box::new(source),
                            }
                        })?
                    }
                    ChartRecipe::Location { kind } => gen_location_chart(self.seed, s.graph.as_ref(), *kind, rng),
                    ChartRecipe::Scatter { curve, noise_sigma, n } => {
                        let params = ScatterParams { curve: *curve, noise_sigma: *noise_sigma, n: *n, ..Default::default() };
                        gen_scatter(&params, s.graph.as_ref(), self.seed, rng)
                    }
                };
                Ok(FilledContent::Chart { chart: spec })
            }
        }
    }

    fn fetch_tuple(
        &self,
        placeholder: &str,
        source: &str,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<(String, Fetched)>, GeneratorError> {
        let src = self.services.sources.tupled(source).map_err(|e| self.source_err(placeholder, e))?;
        let mut tries = 0;
        loop {
            let exclude = self.exclusions();
            let parts = src.fetch_parts(self.seed, rng, &exclude).map_err(|e| self.source_err(placeholder, e))?;
            let collides = parts.iter().any(|(_, f)| f.item.asset_id().is_some_and(|id| exclude.contains(id)));
            if !collides || tries == IMAGE_RETRY_BUDGET {
                return Ok(parts);
            }
            tries += 1;
        }
    }
}

/// Fills every placeholder of the generator's template for `seed`. Images already
/// in `knowledge` are avoided where the sources allow it.
pub fn generate_slide(
    spec: &SlideGeneratorSpec,
    template: &SlideTemplate,
    seed: &str,
    knowledge: &GenerationKnowledge,
    services: &Services,
    rng: &mut dyn RngCore,
) -> Result<Slide, GeneratorError> {
    if template.template_id != spec.template_id {
        return Err(GeneratorError::UnknownTemplate { generator: spec.name.clone(), template: spec.template_id.clone() });
    }
    let mut fill = SlideFill {
        spec,
        seed,
        services,
        knowledge,
        local_images: HashSet::new(),
        tuples: HashMap::new(),
        extra_tags: Vec::new(),
    };
    let mut fills = BTreeMap::new();
    for p in &template.placeholders {
        let binding = spec.bindings.get(&p.id).ok_or_else(|| GeneratorError::Binding {
            generator: spec.name.clone(),
            placeholder: p.id.clone(),
            reason: "placeholder is not bound".into(),
        })?;
        let content = fill.fill(&p.id, binding, rng)?;
        if !content.fits(p.kind) {
            return Err(GeneratorError::Binding {
                generator: spec.name.clone(),
                placeholder: p.id.clone(),
                reason: format!("content does not fit a {:?} placeholder", p.kind),
            });
        }
        fills.insert(p.id.clone(), content);
    }
    let mut tags = spec.tags.clone();
    for t in fill.extra_tags {
        if !tags.contains(&t) {
            tags.push(t);
        }
    }
    Ok(Slide {
        template_id: template.template_id.clone(),
        fills,
        meta: SlideMeta { seed: seed.to_string(), generator: spec.name.clone(), round: 0, tags, seed_fallback: false },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::schema::tests::fixture_schema;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn front() -> WeightFunction {
        WeightFunction::FrontLoaded { peak_start: 1, peak_end: 2, level: 1.0, decay: 0.5, cutoff: None }
    }

    #[test]
    fn curve_shapes() {
        let title = WeightFunction::OnlyFirst { level: 1.0 };
        assert!(title.eval(0, 7) > 0.0);
        assert_eq!(title.eval(3, 7), 0.0);
        let end = WeightFunction::OnlyLast { level: 1.0 };
        assert_eq!(end.eval(5, 7), 0.0);
        assert_eq!(end.eval(6, 7), 1.0);
        for p in 0..7 {
            assert_eq!(WeightFunction::Flat { level: 1.0 }.eval(p, 7), 1.0);
        }
        let inner = WeightFunction::InteriorFlat { level: 2.0 };
        assert_eq!([0, 1, 5, 6].map(|p| inner.eval(p, 7)), [0.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn front_loaded_by_hand() {
        // peak 1..=2 at level 1, then 1 * 0.5^(p - 2)
        let f = front();
        assert_eq!([1, 2, 3, 4].map(|p| f.eval(p, 7)), [1.0, 1.0, 0.5, 0.25]);
        assert_eq!(f.eval(0, 7), 0.0);
        assert_eq!(f.eval(6, 7), 0.0);
        let cut = WeightFunction::FrontLoaded { peak_start: 1, peak_end: 2, level: 1.0, decay: 0.5, cutoff: Some(3) };
        assert_eq!([3, 4].map(|p| cut.eval(p, 7)), [0.5, 0.0]);
    }

    fn roster(weights: &[f64]) -> PresentationSchema {
        let mut s = fixture_schema();
        let base = s.generators[1].clone();
        s.generators.truncate(1);
        for (i, w) in weights.iter().enumerate() {
            let mut g = base.clone();
            g.name = format!("g{i}");
            g.weight_fn = WeightFunction::InteriorFlat { level: *w };
            s.generators.push(g);
        }
        s
    }

    fn chi_square_p(counts: &[f64], probs: &[f64]) -> f64 {
        let n: f64 = counts.iter().sum();
        let chi2: f64 = counts.iter().zip(probs).map(|(o, p)| (o - p * n).powi(2) / (p * n)).sum();
        1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(chi2)
    }

    #[test]
    fn roulette_frequencies() {
        for (weights, probs) in [(vec![3.0, 1.0], vec![0.75, 0.25]), (vec![2.0, 1.0, 1.0], vec![0.5, 0.25, 0.25])] {
            let s = roster(&weights);
            let mut counts = vec![0.0; weights.len()];
            let mut rng = rng_from_seed(99);
            for _ in 0..10_000 {
                let g = select_generator(&s, 3, 7, &GenerationKnowledge::default(), &mut rng).unwrap();
                counts[g.name[1..].parse::<usize>().unwrap()] += 1.0;
            }
            assert!(chi_square_p(&counts, &probs) > 0.01, "{counts:?}");
        }
    }

    #[test]
    fn title_claims_position_zero() {
        let mut s = roster(&[1.0]);
        s.generators[1].weight_fn = WeightFunction::Flat { level: 100.0 };
        for seed in 0..200 {
            let g = select_generator(&s, 0, 7, &GenerationKnowledge::default(), &mut rng_from_seed(seed)).unwrap();
            assert_eq!(g.name, "title");
        }
    }

    #[test]
    fn caps_and_limits_filter() {
        let mut s = roster(&[1.0, 1.0]);
        s.generators[1].tags = vec![Tag::new("quote").unwrap()];
        s.generators[2].max_per_deck = Some(1);
        let mut k = GenerationKnowledge::default();
        k.tag_counts.insert(Tag::new("quote").unwrap(), 1);
        assert_eq!(select_generator(&s, 2, 7, &k, &mut rng_from_seed(0)).unwrap().name, "g1");
        k.generator_counts.insert("g1".into(), 1);
        assert!(matches!(select_generator(&s, 2, 7, &k, &mut rng_from_seed(0)), Err(GeneratorError::NoAdmissibleGenerator(2))));
    }

    #[test]
    fn singleton_roster() {
        let s = roster(&[1.0]);
        assert_eq!(select_generator(&s, 4, 7, &GenerationKnowledge::default(), &mut rng_from_seed(5)).unwrap().name, "g0");
    }

    #[test]
    fn weight_function_json() {
        let w: WeightFunction = serde_json::from_str(r#"{"curve": "front_loaded", "peak_start": 1, "peak_end": 2, "decay": 0.5, "cutoff": 3}"#).unwrap();
        assert!(w.is_valid());
        assert_eq!(w.eval(3, 7), 0.5);
        let b: Binding = serde_json::from_str(r#"{"type": "chart", "chart": {"recipe": "scatter", "curve": "quadratic", "noise_sigma": 1.0}}"#).unwrap();
        assert!(matches!(b, Binding::Chart { chart: ChartRecipe::Scatter { n: 20, .. } }));
    }
}
