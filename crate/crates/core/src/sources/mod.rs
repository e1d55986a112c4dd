//! Content sources: text, image and tupled providers behind one contract.
//!
//! A source first tries to find content related to the slide seed and falls
//! back to a uniformly random item from its pool. Offline corpora back every
//! source; online adapters plug in through [`Provider`] and can be wrapped in
//! a disk cache.

mod cache;
mod composite;
mod corpus;
mod registry;
mod tupled;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::model::{ImageAsset, MediaKind};
use crate::model::Tag;
use crate::rng::pick_index;

pub use cache::{cached, CachedProvider};
pub use composite::{combine, CompositeSource};
pub use corpus::{extract_action, ImageCorpus, ImageEntry, TextCorpus, WikiHowCorpus};
pub use registry::{SourceRegistry, SourcesManifest};
pub use tupled::{fetch_tuple, CaptionTupleSource, LinkedPart, LinkedTupleSource, TupledSource};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error("source {0} has no content")]
    SourceEmpty(String),
    #[error("source {name} unavailable: {reason}")]
    SourceUnavailable { name: String, reason: String },
    #[error("source {name} is a {actual:?} source, expected {expected:?}")]
    WrongKind { name: String, expected: SourceKind, actual: SourceKind },
    #[error("composite {0} mixes source kinds")]
    MixedKinds(String),
    #[error("composite {0}: every child failed")]
    AllChildrenFailed(String),
    #[error("composite {name}: {reason}")]
    BadComposite { name: String, reason: String },
    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("corpus manifest: {0}")]
    Manifest(String),
    #[error("unknown source {0:?}")]
    UnknownSource(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Text,
    Image,
    Tupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Flavour {
    #[default]
    Neutral,
    Odd,
    Cute,
    Vintage,
    Inspirational,
    Chart,
    Gif,
    /// Jokes and punchlines; excluded from serious schemas.
    Funny,
}

impl Flavour {
    pub fn is_comedic(self) -> bool {
        matches!(self, Flavour::Odd | Flavour::Cute | Flavour::Gif | Flavour::Inspirational | Flavour::Funny)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub name: String,
    pub kind: SourceKind,
    #[serde(default)]
    pub flavour: Flavour,
    #[serde(default = "yes")]
    pub supports_seed: bool,
    /// Tags every slide using this source inherits (e.g. `quote`).
    #[serde(default)]
    pub tags: Vec<Tag>,
    /// Chance of ignoring the seed and picking at random.
    #[serde(default)]
    pub random_fallback_probability: f64,
}

fn yes() -> bool {
    true
}

impl SourceInfo {
    pub fn new(name: &str, kind: SourceKind, flavour: Flavour) -> Self {
        SourceInfo {
            name: name.to_string(),
            kind,
            flavour,
            supports_seed: true,
            tags: Vec::new(),
            random_fallback_probability: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Item {
    Text { text: String },
    Image { asset: ImageAsset },
}

impl Item {
    pub fn asset_id(&self) -> Option<&str> {
        match self {
            Item::Image { asset } => Some(&asset.asset_id),
            Item::Text { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextContent {
    pub text: String,
    pub source_name: String,
    pub related_to_seed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub item: Item,
    pub source_name: String,
    pub related_to_seed: bool,
    /// Tags of every source on the path that produced the item.
    pub tags: Vec<Tag>,
}

/// Raw lookup backend: an offline corpus or an online adapter.
pub trait Provider: Send + Sync {
    /// Items related to `seed`; may be empty.
    fn search(&self, seed: &str) -> Result<Vec<Item>, SourceError>;
    /// Items to choose from when ignoring the seed.
    fn pool(&self) -> Result<Arc<[Item]>, SourceError>;
    fn is_online(&self) -> bool {
        false
    }
    /// Stable identity used for cache keys.
    fn cache_name(&self) -> &str;
}

/// The uniform fetch contract shared by simple and composite sources.
pub trait ContentSource: Send + Sync {
    fn info(&self) -> &SourceInfo;

    /// Returns an item, avoiding image asset ids in `exclude` where the
    /// source has an alternative.
    fn fetch(&self, seed: &str, rng: &mut dyn RngCore, exclude: &HashSet<String>) -> Result<Fetched, SourceError>;
}

impl fmt::Debug for dyn ContentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentSource({})", self.info().name)
    }
}

enum Pick<'a> {
    Fresh(&'a Item),
    Collides(&'a Item),
}

/// Draws uniformly from `candidates`; only when that draw is excluded does it
/// draw again among the non-excluded ones. Without exclusions the outcome is
/// identical to a plain uniform draw.
fn pick<'a>(candidates: &'a [Item], exclude: &HashSet<String>, rng: &mut dyn RngCore) -> Option<Pick<'a>> {
    let first = &candidates[pick_index(candidates.len(), rng)?];
    let excluded = |item: &Item| item.asset_id().is_some_and(|id| exclude.contains(id));
    if !excluded(first) {
        return Some(Pick::Fresh(first));
    }
    let open: Vec<&Item> = candidates.iter().filter(|c| !excluded(c)).collect();
    match pick_index(open.len(), rng) {
        Some(i) => Some(Pick::Fresh(open[i])),
        None => Some(Pick::Collides(first)),
    }
}

/// A provider plus an optional offline fallback for when it is unavailable.
pub struct LookupSource {
    info: SourceInfo,
    provider: Arc<dyn Provider>,
    fallback: Option<Arc<dyn Provider>>,
}

impl LookupSource {
    pub fn new(info: SourceInfo, provider: Arc<dyn Provider>) -> Self {
        LookupSource { info, provider, fallback: None }
    }

    pub fn with_fallback(mut self, fallback: Arc<dyn Provider>) -> Self {
        self.fallback = Some(fallback);
        self
    }

    pub fn provider(&self) -> &Arc<dyn Provider> {
        &self.provider
    }

    fn with_backup<T>(&self, f: impl Fn(&dyn Provider) -> Result<T, SourceError>) -> Result<T, SourceError> {
        match f(self.provider.as_ref()) {
            Err(SourceError::SourceUnavailable { name, reason }) => match &self.fallback {
                Some(fb) => {
                    log::warn!("{name} unavailable ({reason}), using offline corpus");
                    f(fb.as_ref())
                }
                None => Err(SourceError::SourceUnavailable { name, reason }),
            },
            other => other,
        }
    }

    fn fetched(&self, item: &Item, related: bool) -> Fetched {
        Fetched {
            item: item.clone(),
            source_name: self.info.name.clone(),
            related_to_seed: related,
            tags: self.info.tags.clone(),
        }
    }
}

impl ContentSource for LookupSource {
    fn info(&self) -> &SourceInfo {
        &self.info
    }

    fn fetch(&self, seed: &str, rng: &mut dyn RngCore, exclude: &HashSet<String>) -> Result<Fetched, SourceError> {
        let p = self.info.random_fallback_probability;
        let use_seed = self.info.supports_seed && !(p > 0.0 && rng.random::<f64>() < p);
        let mut seeded_collision = None;
        if use_seed {
            let matches = self.with_backup(|prov| prov.search(seed))?;
            match pick(&matches, exclude, rng) {
                Some(Pick::Fresh(item)) => return Ok(self.fetched(item, true)),
                Some(Pick::Collides(item)) => seeded_collision = Some(item.clone()),
                None => {}
            }
        }
        let mut pool = self.with_backup(|prov| prov.pool())?;
        if pool.is_empty() {
            if let Some(fb) = &self.fallback {
                pool = fb.pool()?;
            }
        }
        match pick(&pool, exclude, rng) {
            Some(Pick::Fresh(item)) => Ok(self.fetched(item, false)),
            Some(Pick::Collides(item)) => Ok(match seeded_collision {
                Some(s) => self.fetched(&s, true),
                None => self.fetched(item, false),
            }),
            None => match seeded_collision {
                Some(s) => Ok(self.fetched(&s, true)),
                None => Err(SourceError::SourceEmpty(self.info.name.clone())),
            },
        }
    }
}

fn expect_kind(source: &dyn ContentSource, expected: SourceKind) -> Result<(), SourceError> {
    let actual = source.info().kind;
    if actual == expected {
        Ok(())
    } else {
        Err(SourceError::WrongKind { name: source.info().name.clone(), expected, actual })
    }
}

pub fn fetch_text(source: &dyn ContentSource, seed: &str, rng: &mut dyn RngCore) -> Result<TextContent, SourceError> {
    expect_kind(source, SourceKind::Text)?;
    let f = source.fetch(seed, rng, &HashSet::new())?;
    match f.item {
        Item::Text { text } if !text.trim().is_empty() => Ok(TextContent {
            text,
            source_name: f.source_name,
            related_to_seed: f.related_to_seed,
        }),
        _ => Err(SourceError::SourceEmpty(source.info().name.clone())),
    }
}

pub fn fetch_image(source: &dyn ContentSource, seed: &str, rng: &mut dyn RngCore) -> Result<ImageAsset, SourceError> {
    fetch_image_excluding(source, seed, rng, &HashSet::new()).map(|(asset, _)| asset)
}

/// Image fetch that avoids `exclude` when possible; also reports whether the
/// asset matched the seed.
pub fn fetch_image_excluding(
    source: &dyn ContentSource,
    seed: &str,
    rng: &mut dyn RngCore,
    exclude: &HashSet<String>,
) -> Result<(ImageAsset, bool), SourceError> {
    expect_kind(source, SourceKind::Image)?;
    let f = source.fetch(seed, rng, exclude)?;
    match f.item {
        Item::Image { asset } => Ok((asset, f.related_to_seed)),
        Item::Text { .. } => Err(SourceError::WrongKind {
            name: source.info().name.clone(),
            expected: SourceKind::Image,
            actual: SourceKind::Text,
        }),
    }
}
