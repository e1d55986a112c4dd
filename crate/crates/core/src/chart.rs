//! Synthesised chart data for the analytical slides.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::grammar::{expand, ExpansionBudget, ExpansionContext, Grammar, GrammarError};
use crate::graph::RelatedTerms;
use crate::rng::pick_index;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Histogram,
    Pie,
    Scatter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartData {
    Categories(Vec<(String, f64)>),
    Points(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub data: ChartData,
    pub axis_labels: Option<(String, String)>,
}

impl ChartSpec {
    pub fn categories(&self) -> &[(String, f64)] {
        match &self.data {
            ChartData::Categories(c) => c,
            ChartData::Points(_) => &[],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        match &self.data {
            ChartData::Points(p) => p,
            ChartData::Categories(_) => &[],
        }
    }

    pub fn is_well_formed(&self) -> bool {
        match (&self.kind, &self.data) {
            (ChartKind::Scatter, ChartData::Points(p)) => p.len() >= 2,
            (ChartKind::Histogram, ChartData::Categories(c)) => {
                !c.is_empty() && c.iter().all(|(_, v)| v.is_finite() && *v >= 0.0)
            }
            (ChartKind::Pie, ChartData::Categories(c)) => {
                c.iter().all(|(_, v)| v.is_finite() && *v >= 0.0) && c.iter().map(|(_, v)| v).sum::<f64>() > 0.0
            }
            _ => false,
        }
    }
}

/// Scales values so they sum to 100. Values must be non-negative with a
/// positive total.
pub fn renormalize_to_100(values: &mut [(String, f64)]) {
    let total: f64 = values.iter().map(|(_, v)| *v).sum();
    if total <= 0.0 {
        return;
    }
    for (_, v) in values.iter_mut() {
        *v = *v * 100.0 / total;
    }
    // push the rounding residue onto the largest wedge
    let residue = 100.0 - values.iter().map(|(_, v)| *v).sum::<f64>();
    if let Some((_, v)) = values.iter_mut().max_by(|a, b| a.1.total_cmp(&b.1)) {
        *v += residue;
    }
}

/// Support of the yes/no answer values.
pub const YES_NO_RANGE: (f64, f64) = (5.0, 40.0);
/// Support of the funny answer value; disjoint from and above [`YES_NO_RANGE`].
pub const FUNNY_RANGE: (f64, f64) = (45.0, 90.0);

pub const QUESTION_RULE: &str = "yesno_question";
pub const FUNNY_ANSWER_RULE: &str = "funny_answer";

pub fn gen_yesno_chart(
    kind: ChartKind,
    grammar: &Grammar,
    ctx: &ExpansionContext,
    budget: &ExpansionBudget,
    rng: &mut dyn RngCore,
) -> Result<ChartSpec, GrammarError> {
    let title = expand(grammar, QUESTION_RULE, ctx, budget, rng)?;
    let funny = expand(grammar, FUNNY_ANSWER_RULE, ctx, budget, rng)?;
    let yes = rng.random_range(YES_NO_RANGE.0..=YES_NO_RANGE.1);
    let no = rng.random_range(YES_NO_RANGE.0..=YES_NO_RANGE.1);
    let funny_value = rng.random_range(FUNNY_RANGE.0..=FUNNY_RANGE.1);
    let mut cats = vec![("Yes".to_string(), yes), ("No".to_string(), no), (funny, funny_value)];
    if kind == ChartKind::Pie {
        renormalize_to_100(&mut cats);
    }
    Ok(ChartSpec {
        kind: if kind == ChartKind::Pie { ChartKind::Pie } else { ChartKind::Histogram },
        title,
        data: ChartData::Categories(cats),
        axis_labels: None,
    })
}

pub const GENERIC_LOCATIONS: &[&str] = &[
    "home", "the office", "the park", "the kitchen", "the beach", "a museum", "the garage",
    "the moon", "a library", "grandma's house",
];

pub const MAX_LOCATION_WEDGES: usize = 5;

pub fn gen_location_chart(
    seed: &str,
    graph: &dyn RelatedTerms,
    kind: ChartKind,
    rng: &mut dyn RngCore,
) -> ChartSpec {
    let mut labels: Vec<String> = graph
        .related_locations(seed, MAX_LOCATION_WEDGES)
        .unwrap_or_default()
        .into_iter()
        .map(|r| r.to_term)
        .collect();
    labels.dedup();
    if labels.is_empty() {
        let mut pool: Vec<&str> = GENERIC_LOCATIONS.to_vec();
        for _ in 0..4 {
            if let Some(i) = pick_index(pool.len(), rng) {
                labels.push(pool.remove(i).to_string());
            }
        }
    }
    let mut cats: Vec<(String, f64)> = labels
        .into_iter()
        .map(|l| (l, rng.random_range(1.0..=100.0)))
        .collect();
    let kind = if kind == ChartKind::Pie { ChartKind::Pie } else { ChartKind::Histogram };
    if kind == ChartKind::Pie {
        renormalize_to_100(&mut cats);
    }
    ChartSpec {
        kind,
        title: format!("Where you can find {}", crate::grammar::with_article(seed)),
        data: ChartData::Categories(cats),
        axis_labels: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Quadratic,
    Logarithmic,
}

impl CurveKind {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            CurveKind::Quadratic => x * x,
            CurveKind::Logarithmic => x.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterParams {
    pub curve: CurveKind,
    pub noise_sigma: f64,
    pub n: usize,
    /// Closed x range sampled at `n` evenly spaced points.
    pub x_range: (f64, f64),
}

impl Default for ScatterParams {
    fn default() -> Self {
        ScatterParams { curve: CurveKind::Quadratic, noise_sigma: 1.0, n: 20, x_range: (1.0, 10.0) }
    }
}

pub fn gen_scatter(
    params: &ScatterParams,
    graph: &dyn RelatedTerms,
    seed: &str,
    rng: &mut dyn RngCore,
) -> ChartSpec {
    let n = params.n.max(2);
    let (lo, hi) = params.x_range;
    let sigma = if params.noise_sigma.is_finite() { params.noise_sigma.max(0.0) } else { 0.0 };
    let noise = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    let points = (0..n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let y = params.curve.eval(x);
            let eps = if sigma > 0.0 { noise.sample(rng) } else { 0.0 };
            (x, y + eps)
        })
        .collect();

    let neighbours: Vec<String> = graph
        .related_terms(seed, 20)
        .unwrap_or_default()
        .into_iter()
        .map(|r| r.to_term)
        .collect();
    let axis = match neighbours.len() {
        0 => (seed.to_string(), "time".to_string()),
        1 => (neighbours[0].clone(), seed.to_string()),
        len => {
            let a = rng.random_range(0..len);
            let mut b = rng.random_range(0..len - 1);
            if b >= a {
                b += 1;
            }
            (neighbours[a].clone(), neighbours[b].clone())
        }
    };
    ChartSpec {
        kind: ChartKind::Scatter,
        title: format!("{} versus {}", crate::grammar::title_case(&axis.1), crate::grammar::title_case(&axis.0)),
        data: ChartData::Points(points),
        axis_labels: Some(axis),
    }
}
