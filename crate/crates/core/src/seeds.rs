//! Per-slide seed words from a constrained random walk over the word web.
//!
//! The topic opens and closes the deck and returns every `min_gap..=max_gap`
//! slides. Between returns, each seed is a neighbour of the previous one; when
//! the walk gets stuck it backtracks to the seed two slides back, then four,
//! and so on, before giving up and reusing the topic.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::graph::{Relation, RelatedTerms};
use crate::model::Topic;
use crate::rng::{pick_index, roulette};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WalkPolicy {
    Uniform,
    #[default]
    WeightProportional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    pub min_gap: usize,
    pub max_gap: usize,
    pub max_backtrack_depth: usize,
    pub walk_policy: WalkPolicy,
    /// How many neighbours are fetched per lookup.
    pub neighbor_limit: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            min_gap: 3,
            max_gap: 6,
            max_backtrack_depth: 5,
            walk_policy: WalkPolicy::WeightProportional,
            neighbor_limit: 50,
        }
    }
}

impl WalkConfig {
    pub fn is_valid(&self) -> bool {
        self.min_gap >= 1 && self.min_gap <= self.max_gap && self.max_backtrack_depth >= 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedOrigin {
    /// Scheduled topic slot (first, last, or a periodic return).
    Topic,
    /// Reached from the seed at `parent` over a graph edge.
    Walk { parent: usize },
    /// No usable neighbour within the backtrack budget; the topic stands in.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSequence {
    pub seeds: Vec<String>,
    /// Scheduled topic slots, ascending.
    pub topic_positions: Vec<usize>,
    pub origins: Vec<SeedOrigin>,
}

impl SeedSequence {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn is_fallback(&self, i: usize) -> bool {
        self.origins[i] == SeedOrigin::Fallback
    }
}

/// Picks the scheduled topic slots for a deck of `n` slides.
fn schedule_returns<R: RngCore + ?Sized>(n: usize, config: &WalkConfig, rng: &mut R) -> Vec<usize> {
    let mut positions = vec![0];
    if n <= 1 {
        return positions;
    }
    let last = n - 1;
    let mut at = 0;
    loop {
        let gap = rng.random_range(config.min_gap..=config.max_gap);
        let next = at + gap;
        if next >= last {
            break;
        }
        positions.push(next);
        at = next;
    }
    positions.push(last);
    positions
}

fn choose<R: RngCore + ?Sized>(options: &[Relation], policy: WalkPolicy, rng: &mut R) -> Option<usize> {
    match policy {
        WalkPolicy::Uniform => pick_index(options.len(), rng),
        WalkPolicy::WeightProportional => {
            let weights: Vec<f64> = options.iter().map(|r| r.weight).collect();
            roulette(&weights, rng).or_else(|| pick_index(options.len(), rng))
        }
    }
}

pub fn generate_seeds<R: RngCore + ?Sized>(
    topic: &Topic,
    n: usize,
    graph: &dyn RelatedTerms,
    config: &WalkConfig,
    rng: &mut R,
) -> SeedSequence {
    let topic_word = topic.as_str();
    if n == 0 {
        return SeedSequence { seeds: vec![], topic_positions: vec![], origins: vec![] };
    }
    let topic_positions = schedule_returns(n, config, rng);
    let mut seeds: Vec<String> = Vec::with_capacity(n);
    let mut origins = Vec::with_capacity(n);

    for i in 0..n {
        if topic_positions.binary_search(&i).is_ok() {
            seeds.push(topic_word.to_string());
            origins.push(SeedOrigin::Topic);
            continue;
        }
        let previous = seeds[i - 1].clone();
        // the previous seed first, then two back, four back, ...
        let ancestors = std::iter::once(i - 1).chain(
            (1..=config.max_backtrack_depth)
                .map_while(|k| i.checked_sub(2 * k)),
        );
        let mut chosen = None;
        for parent in ancestors {
            let options: Vec<Relation> = match graph.related_terms(&seeds[parent], config.neighbor_limit) {
                Ok(rels) => rels
                    .into_iter()
                    .filter(|r| r.to_term != topic_word && r.to_term != previous)
                    .collect(),
                Err(e) => {
                    log::warn!("lookup for {:?} failed: {e}", seeds[parent]);
                    Vec::new()
                }
            };
            if let Some(k) = choose(&options, config.walk_policy, rng) {
                chosen = Some((options[k].to_term.clone(), parent));
                break;
            }
        }
        match chosen {
            Some((word, parent)) => {
                seeds.push(word);
                origins.push(SeedOrigin::Walk { parent });
            }
            None => {
                seeds.push(topic_word.to_string());
                origins.push(SeedOrigin::Fallback);
            }
        }
    }
    SeedSequence { seeds, topic_positions, origins }
}
