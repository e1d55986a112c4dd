//! Named sources loaded from `sources.json` in a corpus directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use super::{
    combine, CaptionTupleSource, ContentSource, Flavour, ImageCorpus, LinkedPart, LinkedTupleSource, LookupSource,
    Provider, SourceError, SourceInfo, SourceKind, TextCorpus, TupledSource, WikiHowCorpus,
};
use crate::model::{ImageAsset, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TextFormat {
    #[default]
    Lines,
    Wikihow,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub name: String,
    pub kind: SourceKind,
    #[serde(default)]
    pub flavour: Flavour,
    /// Corpus-relative file (text) or directory (image).
    pub path: String,
    #[serde(default)]
    pub format: TextFormat,
    #[serde(default)]
    pub tags: Vec<Tag>,
    #[serde(default = "yes")]
    pub supports_seed: bool,
    #[serde(default)]
    pub random_fallback_probability: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeEntry {
    pub name: String,
    pub kind: SourceKind,
    #[serde(default)]
    pub flavour: Flavour,
    pub children: Vec<(String, f64)>,
    #[serde(default)]
    pub tags: Vec<Tag>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkedEntry {
    pub caption: String,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TupleEntry {
    Captions {
        name: String,
        #[serde(default)]
        flavour: Flavour,
        path: String,
        width: usize,
        children: Vec<String>,
        #[serde(default)]
        tags: Vec<Tag>,
    },
    Linked {
        name: String,
        #[serde(default)]
        flavour: Flavour,
        lead: LinkedEntry,
        followers: Vec<LinkedEntry>,
        #[serde(default)]
        tags: Vec<Tag>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcesManifest {
    #[serde(default = "median")]
    pub quality_quantile: f64,
    #[serde(default)]
    pub sources: Vec<SourceEntry>,
    #[serde(default)]
    pub composites: Vec<CompositeEntry>,
    #[serde(default)]
    pub tuples: Vec<TupleEntry>,
}

fn median() -> f64 {
    0.5
}

#[derive(Default)]
pub struct SourceRegistry {
    root: PathBuf,
    content: BTreeMap<String, Arc<dyn ContentSource>>,
    tupled: BTreeMap<String, Arc<dyn TupledSource>>,
    images: BTreeMap<String, Arc<ImageCorpus>>,
}

impl SourceRegistry {
    pub fn new(root: &Path) -> Self {
        SourceRegistry { root: root.to_path_buf(), ..Default::default() }
    }

    /// Reads `<root>/sources.json` and every corpus it names.
    pub fn load(root: &Path) -> Result<Self, SourceError> {
        let path = root.join("sources.json");
        let text = std::fs::read_to_string(&path)
            .map_err(|e| SourceError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        let manifest: SourcesManifest =
            serde_json::from_str(&text).map_err(|e| SourceError::Manifest(e.to_string()))?;
        Self::from_manifest(root, &manifest)
    }

    pub fn from_manifest(root: &Path, m: &SourcesManifest) -> Result<Self, SourceError> {
        let mut reg = SourceRegistry::new(root);
        for e in &m.sources {
            let info = SourceInfo {
                name: e.name.clone(),
                kind: e.kind,
                flavour: e.flavour,
                supports_seed: e.supports_seed,
                tags: e.tags.clone(),
                random_fallback_probability: e.random_fallback_probability,
            };
            let provider: Arc<dyn Provider> = match (e.kind, e.format) {
                (SourceKind::Text, TextFormat::Lines) => Arc::new(TextCorpus::load(&e.name, &root.join(&e.path))?),
                (SourceKind::Text, TextFormat::Wikihow) => Arc::new(WikiHowCorpus::load(&e.name, &root.join(&e.path))?),
                (SourceKind::Image, _) => {
                    let c = Arc::new(ImageCorpus::load(
                        &e.name,
                        root,
                        &e.path,
                        e.flavour == Flavour::Gif,
                        m.quality_quantile,
                    )?);
                    reg.images.insert(e.name.clone(), c.clone());
                    c
                }
                (SourceKind::Tupled, _) => {
                    return Err(SourceError::Manifest(format!("{}: tupled sources belong under \"tuples\"", e.name)))
                }
            };
            reg.insert_content(Arc::new(LookupSource::new(info, provider)))?;
        }
        for c in &m.composites {
            let children = c
                .children
                .iter()
                .map(|(n, w)| Ok((reg.content(n)?, *w)))
                .collect::<Result<Vec<_>, SourceError>>()?;
            let mut info = SourceInfo::new(&c.name, c.kind, c.flavour);
            info.tags = c.tags.clone();
            reg.insert_content(Arc::new(combine(info, children)?))?;
        }
        for t in &m.tuples {
            let source: Arc<dyn TupledSource> = match t {
                TupleEntry::Captions { name, flavour, path, width, children, tags } => {
                    let rows = CaptionTupleSource::load_rows(&root.join(path), *width)?;
                    let kids = children.iter().map(|n| reg.image_source(n)).collect::<Result<Vec<_>, _>>()?;
                    let mut info = SourceInfo::new(name, SourceKind::Tupled, *flavour);
                    info.tags = tags.clone();
                    Arc::new(CaptionTupleSource::new(info, rows, kids))
                }
                TupleEntry::Linked { name, flavour, lead, followers, tags } => {
                    let lead_src = reg.content(&lead.source)?;
                    if lead_src.info().kind != SourceKind::Text {
                        return Err(SourceError::WrongKind {
                            name: lead.source.clone(),
                            expected: SourceKind::Text,
                            actual: lead_src.info().kind,
                        });
                    }
                    let followers = followers
                        .iter()
                        .map(|f| Ok(LinkedPart::new(&f.caption, reg.content(&f.source)?)))
                        .collect::<Result<Vec<_>, SourceError>>()?;
                    let mut info = SourceInfo::new(name, SourceKind::Tupled, *flavour);
                    info.tags = tags.clone();
                    Arc::new(LinkedTupleSource::new(info, LinkedPart::new(&lead.caption, lead_src), followers))
                }
            };
            reg.insert_tupled(source)?;
        }
        Ok(reg)
    }

    fn taken(&self, name: &str) -> bool {
        self.content.contains_key(name) || self.tupled.contains_key(name)
    }

    pub fn insert_content(&mut self, source: Arc<dyn ContentSource>) -> Result<(), SourceError> {
        let name = source.info().name.clone();
        if self.taken(&name) {
            return Err(SourceError::Manifest(format!("duplicate source name {name:?}")));
        }
        self.content.insert(name, source);
        Ok(())
    }

    pub fn insert_tupled(&mut self, source: Arc<dyn TupledSource>) -> Result<(), SourceError> {
        let name = source.info().name.clone();
        if self.taken(&name) {
            return Err(SourceError::Manifest(format!("duplicate source name {name:?}")));
        }
        self.tupled.insert(name, source);
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn content(&self, name: &str) -> Result<Arc<dyn ContentSource>, SourceError> {
        self.content.get(name).cloned().ok_or_else(|| SourceError::UnknownSource(name.to_string()))
    }

    fn image_source(&self, name: &str) -> Result<Arc<dyn ContentSource>, SourceError> {
        let s = self.content(name)?;
        if s.info().kind != SourceKind::Image {
            return Err(SourceError::WrongKind { name: name.to_string(), expected: SourceKind::Image, actual: s.info().kind });
        }
        Ok(s)
    }

    pub fn tupled(&self, name: &str) -> Result<Arc<dyn TupledSource>, SourceError> {
        self.tupled.get(name).cloned().ok_or_else(|| SourceError::UnknownSource(name.to_string()))
    }

    /// Looks a name up among simple, composite and tupled sources.
    pub fn info(&self, name: &str) -> Option<&SourceInfo> {
        self.content.get(name).map(|s| s.info()).or_else(|| self.tupled.get(name).map(|s| s.info()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.content.keys().chain(self.tupled.keys()).map(String::as_str)
    }

    pub fn image_corpus(&self, name: &str) -> Option<&Arc<ImageCorpus>> {
        self.images.get(name)
    }

    /// Every served still image across all image corpora, in a stable order.
    pub fn still_images(&self) -> Vec<ImageAsset> {
        self.images
            .values()
            .filter_map(|c| c.pool().ok())
            .flat_map(|p| p.to_vec())
            .filter_map(|i| match i {
                super::Item::Image { asset } if asset.media_kind == crate::model::MediaKind::Still => Some(asset),
                _ => None,
            })
            .collect()
    }

    /// Absolute path of a corpus-relative locator.
    pub fn resolve(&self, locator: &str) -> PathBuf {
        self.root.join(locator)
    }
}
