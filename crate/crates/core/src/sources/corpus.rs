//! Offline corpora: line-per-item text files, how-to title lists and image
//! directories with optional `meta.tsv` (`filename<TAB>keywords<TAB>upvotes`).

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{Item, Provider, SourceError};
use crate::model::{ImageAsset, MediaKind};

const MEDIA_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "gif"];

fn io_err(path: &Path, e: std::io::Error) -> SourceError {
    SourceError::Io { path: path.display().to_string(), reason: e.to_string() }
}

fn words(s: &str) -> Vec<String> {
    s.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_string).collect()
}

/// Whole-word match of `seed` inside `haystack`; the last seed word may
/// carry a plural `s` or `es`.
fn matches_seed(haystack: &str, seed: &str) -> bool {
    let (hay, needle) = (words(haystack), words(seed));
    let Some((last, init)) = needle.split_last() else { return false };
    let same_last = |w: &str| {
        w == last || w.strip_suffix('s').is_some_and(|b| b == last) || w.strip_suffix("es").is_some_and(|b| b == last)
    };
    hay.windows(needle.len()).any(|w| w[..init.len()] == *init && same_last(&w[init.len()]))
}

/// One item per line; an optional `<TAB>author` column is rendered as
/// `text (author)`.
pub struct TextCorpus {
    name: String,
    items: Arc<[Item]>,
}

impl TextCorpus {
    pub fn parse(name: &str, text: &str) -> Self {
        let items: Vec<Item> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let text = match l.split_once('\t') {
                    Some((body, author)) if !author.trim().is_empty() => {
                        format!("{} ({})", body.trim(), author.trim())
                    }
                    Some((body, _)) => body.trim().to_string(),
                    None => l.to_string(),
                };
                Item::Text { text }
            })
            .collect();
        TextCorpus { name: name.to_string(), items: items.into() }
    }

    pub fn load(name: &str, path: &Path) -> Result<Self, SourceError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Ok(Self::parse(name, &text))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl Provider for TextCorpus {
    fn search(&self, seed: &str) -> Result<Vec<Item>, SourceError> {
        Ok(self
            .items
            .iter()
            .filter(|i| matches!(i, Item::Text { text } if matches_seed(text, seed)))
            .cloned()
            .collect())
    }

    fn pool(&self) -> Result<Arc<[Item]>, SourceError> {
        Ok(self.items.clone())
    }

    fn cache_name(&self) -> &str {
        &self.name
    }
}

/// Turns a how-to article title into a lowercase infinitive action:
/// `How to Pet a Cat` → `pet a cat`, `5 Ways to Bake Bread` → `bake bread`.
pub fn extract_action(title: &str) -> Option<String> {
    let t = title.trim();
    let lower = t.to_lowercase();
    let rest = if let Some(r) = lower.strip_prefix("how to ") {
        r
    } else {
        let (count, tail) = lower.split_once(' ')?;
        if !count.chars().all(|c| c.is_ascii_digit()) || count.is_empty() {
            return None;
        }
        tail.strip_prefix("ways to ").or_else(|| tail.strip_prefix("easy ways to "))?
    };
    let action = rest.trim().trim_end_matches(['.', '!', '?']).trim();
    (!action.is_empty()).then(|| action.to_string())
}

/// How-to titles searched by seed; items are the extracted actions.
pub struct WikiHowCorpus {
    name: String,
    actions: Arc<[Item]>,
}

impl WikiHowCorpus {
    pub fn parse(name: &str, text: &str) -> Self {
        let actions: Vec<Item> = text
            .lines()
            .filter_map(extract_action)
            .map(|text| Item::Text { text })
            .collect();
        WikiHowCorpus { name: name.to_string(), actions: actions.into() }
    }

    pub fn load(name: &str, path: &Path) -> Result<Self, SourceError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Ok(Self::parse(name, &text))
    }
}

impl Provider for WikiHowCorpus {
    fn search(&self, seed: &str) -> Result<Vec<Item>, SourceError> {
        Ok(self
            .actions
            .iter()
            .filter(|i| matches!(i, Item::Text { text } if matches_seed(text, seed)))
            .cloned()
            .collect())
    }

    fn pool(&self) -> Result<Arc<[Item]>, SourceError> {
        Ok(self.actions.clone())
    }

    fn cache_name(&self) -> &str {
        &self.name
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageEntry {
    pub asset: ImageAsset,
    pub keywords: String,
    pub upvotes: Option<f64>,
}

/// A directory of media files. When any entry carries upvotes, only entries
/// at or above the configured quantile are served.
pub struct ImageCorpus {
    name: String,
    root: PathBuf,
    entries: Vec<ImageEntry>,
    served: Arc<[Item]>,
}

impl ImageCorpus {
    /// Reads `corpus_root/rel_dir`. Locators are stored relative to
    /// `corpus_root`, so manifests do not depend on where the corpus lives.
    pub fn load(
        name: &str,
        corpus_root: &Path,
        rel_dir: &str,
        animated: bool,
        quality_quantile: f64,
    ) -> Result<Self, SourceError> {
        let dir = corpus_root.join(rel_dir);
        let mut files: Vec<String> = std::fs::read_dir(&dir)
            .map_err(|e| io_err(&dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|f| {
                Path::new(f)
                    .extension()
                    .and_then(|x| x.to_str())
                    .is_some_and(|x| MEDIA_EXTENSIONS.contains(&x.to_lowercase().as_str()))
            })
            .collect();
        files.sort();

        let meta_path = dir.join("meta.tsv");
        let mut meta: HashMap<String, (String, Option<f64>)> = HashMap::new();
        if meta_path.exists() {
            let text = std::fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?;
            for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
                let cols: Vec<&str> = line.split('\t').collect();
                let keywords = cols.get(1).map(|k| k.trim().to_string()).unwrap_or_default();
                let upvotes = cols.get(2).and_then(|u| u.trim().parse::<f64>().ok());
                meta.insert(cols[0].trim().to_string(), (keywords, upvotes));
            }
        }

        let rel = rel_dir.trim_matches('/');
        let entries = files
            .into_iter()
            .map(|file| {
                let stem = Path::new(&file).file_stem().and_then(|s| s.to_str()).unwrap_or("").replace(['_', '-'], " ");
                let (keywords, upvotes) = meta.remove(&file).unwrap_or_default();
                let locator = format!("{rel}/{file}");
                ImageEntry {
                    asset: ImageAsset {
                        asset_id: format!("{name}:{locator}"),
                        locator,
                        media_kind: if animated { MediaKind::Animated } else { MediaKind::Still },
                        attribution: format!("{name} corpus"),
                    },
                    keywords: format!("{stem} {keywords}").trim().to_string(),
                    upvotes,
                }
            })
            .collect();
        Ok(Self::from_entries(name, corpus_root, entries, quality_quantile))
    }

    pub fn from_entries(name: &str, root: &Path, entries: Vec<ImageEntry>, quality_quantile: f64) -> Self {
        let threshold = upvote_threshold(&entries, quality_quantile);
        let served: Vec<Item> = entries
            .iter()
            .filter(|e| threshold.is_none_or(|t| e.upvotes.unwrap_or(0.0) >= t))
            .map(|e| Item::Image { asset: e.asset.clone() })
            .collect();
        ImageCorpus { name: name.to_string(), root: root.to_path_buf(), entries, served: served.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[ImageEntry] {
        &self.entries
    }

    fn keywords_of(&self, asset_id: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.asset.asset_id == asset_id).map(|e| e.keywords.as_str())
    }
}

/// Lower empirical quantile of the upvotes, or `None` when no entry has any.
fn upvote_threshold(entries: &[ImageEntry], quantile: f64) -> Option<f64> {
    let mut votes: Vec<f64> = entries.iter().filter_map(|e| e.upvotes).collect();
    if votes.is_empty() || quantile <= 0.0 {
        return None;
    }
    votes.sort_by(f64::total_cmp);
    let idx = ((quantile.min(1.0) * (votes.len() - 1) as f64).floor()) as usize;
    Some(votes[idx])
}

impl Provider for ImageCorpus {
    fn search(&self, seed: &str) -> Result<Vec<Item>, SourceError> {
        Ok(self
            .served
            .iter()
            .filter(|i| {
                i.asset_id()
                    .and_then(|id| self.keywords_of(id))
                    .is_some_and(|k| matches_seed(k, seed))
            })
            .cloned()
            .collect())
    }

    fn pool(&self) -> Result<Arc<[Item]>, SourceError> {
        Ok(self.served.clone())
    }

    fn cache_name(&self) -> &str {
        &self.name
    }
}
