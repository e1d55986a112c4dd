//! Weighted unions of same-kind sources.

use std::collections::HashSet;
use std::sync::Arc;

use rand::RngCore;

use super::{ContentSource, Fetched, SourceError, SourceInfo};
use crate::rng::roulette;

pub struct CompositeSource {
    info: SourceInfo,
    children: Vec<(Arc<dyn ContentSource>, f64)>,
}

/// Builds a composite. Zero-weight children are allowed but never chosen;
/// at least one weight must be positive.
pub fn combine(info: SourceInfo, children: Vec<(Arc<dyn ContentSource>, f64)>) -> Result<CompositeSource, SourceError> {
    let bad = |reason: &str| SourceError::BadComposite { name: info.name.clone(), reason: reason.to_string() };
    if children.is_empty() {
        return Err(bad("no children"));
    }
    if children.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
        return Err(bad("weights must be finite and non-negative"));
    }
    if !children.iter().any(|(_, w)| *w > 0.0) {
        return Err(bad("no positive weight"));
    }
    if children.iter().any(|(c, _)| c.info().kind != info.kind) {
        return Err(SourceError::MixedKinds(info.name.clone()));
    }
    Ok(CompositeSource { info, children })
}

impl CompositeSource {
    pub fn children(&self) -> impl Iterator<Item = (&dyn ContentSource, f64)> {
        self.children.iter().map(|(c, w)| (c.as_ref(), *w))
    }
}

impl ContentSource for CompositeSource {
    fn info(&self) -> &SourceInfo {
        &self.info
    }

    /// Roulette-selects a child; a failing child, or one that could only
    /// return an excluded asset, is dropped and the rest are tried by weight.
    fn fetch(&self, seed: &str, rng: &mut dyn RngCore, exclude: &HashSet<String>) -> Result<Fetched, SourceError> {
        let mut weights: Vec<f64> = self.children.iter().map(|(_, w)| *w).collect();
        let mut collision: Option<Fetched> = None;
        while let Some(i) = roulette(&weights, rng) {
            weights[i] = 0.0;
            let child = &self.children[i].0;
            match child.fetch(seed, rng, exclude) {
                Ok(mut f) => {
                    for t in &self.info.tags {
                        if !f.tags.contains(t) {
                            f.tags.push(t.clone());
                        }
                    }
                    if f.item.asset_id().is_some_and(|id| exclude.contains(id)) {
                        collision.get_or_insert(f);
                        continue;
                    }
                    return Ok(f);
                }
                Err(e) => log::debug!("{}: child {} failed: {e}", self.info.name, child.info().name),
            }
        }
        collision.ok_or_else(|| SourceError::AllChildrenFailed(self.info.name.clone()))
    }
}
