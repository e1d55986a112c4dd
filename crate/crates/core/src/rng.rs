//! Seeded random streams and roulette-wheel selection.
//!
//! Every random decision in the pipeline draws from a [`ChaCha8Rng`] whose
//! seed is derived from the deck's master seed plus a stream coordinate, so
//! output never depends on worker count or scheduling order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type DeckRng = ChaCha8Rng;

/// Stream coordinate reserved for the seed walk.
pub const SEED_WALK_STREAM: u64 = u64::MAX;
/// Stream coordinate reserved for generator scheduling.
pub const SCHEDULE_STREAM: u64 = u64::MAX - 1;
/// Stream coordinate reserved for fallback slides.
pub const FALLBACK_STREAM: u64 = u64::MAX - 2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a (slide, round) coordinate into a 64-bit seed.
pub fn hash64(master: u64, slide_index: u64, round_index: u64) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ slide_index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(b ^ round_index.wrapping_mul(0xA076_1D64_78BD_642F))
}

pub fn rng_from_seed(seed: u64) -> DeckRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The rng a slide generation at `(slide_index, round_index)` uses.
pub fn slide_rng(master: u64, slide_index: usize, round_index: usize) -> DeckRng {
    rng_from_seed(hash64(master, slide_index as u64, round_index as u64))
}

pub fn stream_rng(master: u64, stream: u64) -> DeckRng {
    rng_from_seed(hash64(master, stream, 0))
}

/// Roulette-wheel selection: returns index `i` with probability
/// `weights[i] / sum(weights)`. Non-finite and non-positive weights never win.
/// Returns `None` when no weight is positive.
pub fn roulette<R: RngCore + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let usable = |w: f64| w.is_finite() && w > 0.0;
    let total: f64 = weights.iter().copied().filter(|w| usable(*w)).sum();
    if total <= 0.0 {
        return None;
    }
    let mut ball = rng.random::<f64>() * total;
    let mut last = None;
    for (i, w) in weights.iter().copied().enumerate() {
        if !usable(w) {
            continue;
        }
        if ball < w {
            return Some(i);
        }
        ball -= w;
        last = Some(i);
    }
    // float residue lands on the last positive slot
    last
}

/// Uniform choice of an index in `0..len`; `None` for empty ranges.
pub fn pick_index<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Option<usize> {
    (len > 0).then(|| rng.random_range(0..len))
}
