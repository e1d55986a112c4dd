//! Deck exporters: Office Open XML presentations and a single-file HTML
//! preview. Both lay shapes out from the schema's template geometry.

mod html;
mod pptx;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ImageAsset, SlideTemplate};

pub use html::{export_html, render_html, pie_wedge_paths};
pub use pptx::{export_pptx, pie_angles, write_pptx, ANGLE_UNITS_PER_TURN};

pub const DEFAULT_SLIDE_SIZE: (i64, i64) = (12_192_000, 6_858_000);
pub const DEFAULT_MAX_MEDIA_BYTES: u64 = 50 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("cannot resolve media for {0}")]
    UnresolvableMedia(String),
    #[error("media for {asset_id} is {size} bytes, over the {limit} byte limit")]
    OversizedMedia { asset_id: String, size: u64, limit: u64 },
    #[error("slide {slide} uses unknown template {template}")]
    UnknownTemplate { slide: usize, template: String },
    #[error("archive error: {0}")]
    Archive(String),
    #[error("invalid export options: {0}")]
    Options(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimestampPolicy {
    #[default]
    FixedEpoch,
    SystemClock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportOptions {
    pub timestamp_policy: TimestampPolicy,
    /// Width and height in EMU.
    pub slide_size: (i64, i64),
    pub embed_media: bool,
    pub max_media_bytes: u64,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            timestamp_policy: TimestampPolicy::FixedEpoch,
            slide_size: DEFAULT_SLIDE_SIZE,
            embed_media: true,
            max_media_bytes: DEFAULT_MAX_MEDIA_BYTES,
        }
    }
}

impl ExportOptions {
    fn validate(&self) -> Result<(), ExportError> {
        if self.slide_size.0 <= 0 || self.slide_size.1 <= 0 {
            return Err(ExportError::Options("slide dimensions must be positive".into()));
        }
        Ok(())
    }
}

/// Where exporters find templates and media bytes.
pub struct ExportContext<'a> {
    pub templates: &'a [SlideTemplate],
    /// Directory that corpus-relative locators are resolved against.
    pub media_root: PathBuf,
}

impl<'a> ExportContext<'a> {
    pub fn new(templates: &'a [SlideTemplate], media_root: &Path) -> Self {
        ExportContext { templates, media_root: media_root.to_path_buf() }
    }

    fn template(&self, slide: usize, id: &str) -> Result<&'a SlideTemplate, ExportError> {
        self.templates
            .iter()
            .find(|t| t.template_id == id)
            .ok_or_else(|| ExportError::UnknownTemplate { slide, template: id.to_string() })
    }

    fn media_path(&self, asset: &ImageAsset) -> Option<PathBuf> {
        if asset.locator.contains("://") {
            return None;
        }
        let p = self.media_root.join(&asset.locator);
        p.is_file().then_some(p)
    }

    fn read_media(&self, asset: &ImageAsset, limit: u64) -> Result<Vec<u8>, ExportError> {
        let path = self.media_path(asset).ok_or_else(|| ExportError::UnresolvableMedia(asset.asset_id.clone()))?;
        let size = std::fs::metadata(&path)
            .map_err(|e| ExportError::Io { path: path.display().to_string(), reason: e.to_string() })?
            .len();
        if size > limit {
            return Err(ExportError::OversizedMedia { asset_id: asset.asset_id.clone(), size, limit });
        }
        std::fs::read(&path).map_err(|e| ExportError::Io { path: path.display().to_string(), reason: e.to_string() })
    }
}

fn media_extension(locator: &str) -> &'static str {
    let lower = locator.to_ascii_lowercase();
    if lower.ends_with(".gif") {
        "gif"
    } else if lower.ends_with(".jpg") || lower.ends_with(".jpeg") {
        "jpeg"
    } else {
        "png"
    }
}

fn mime_type(ext: &str) -> &'static str {
    match ext {
        "gif" => "image/gif",
        "jpeg" => "image/jpeg",
        _ => "image/png",
    }
}

pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => {}
            c => out.push(c),
        }
    }
    out
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExportError> {
    std::fs::write(path, bytes).map_err(|e| ExportError::Io { path: path.display().to_string(), reason: e.to_string() })
}

#[cfg(test)]
pub(crate) mod tests {
    use std::collections::BTreeMap;

    use crate::chart::{ChartData, ChartKind, ChartSpec};
    use crate::model::{Deck, FilledContent, Frame, ImageAsset, MediaKind, Placeholder, PlaceholderKind, Slide, SlideMeta, SlideTemplate, Tag, Topic};

    pub fn templates() -> Vec<SlideTemplate> {
        let ph = |id: &str, kind, y| Placeholder { id: id.into(), kind, frame: Frame::new(0.05, y, 0.9, 0.4) };
        vec![
            SlideTemplate { template_id: "title".into(), placeholders: vec![ph("title", PlaceholderKind::TitleText, 0.1), ph("subtitle", PlaceholderKind::SubtitleText, 0.55)] },
            SlideTemplate { template_id: "picture".into(), placeholders: vec![ph("title", PlaceholderKind::TitleText, 0.05), ph("image", PlaceholderKind::Image, 0.5)] },
            SlideTemplate { template_id: "chart".into(), placeholders: vec![ph("chart", PlaceholderKind::Chart, 0.1)] },
        ]
    }

    fn meta(seed: &str) -> SlideMeta {
        SlideMeta { seed: seed.into(), generator: "g".into(), round: 0, tags: vec![Tag::new("x").unwrap()], seed_fallback: false }
    }

    pub fn title_slide(text: &str) -> Slide {
        let mut fills = BTreeMap::new();
        fills.insert("title".into(), FilledContent::Text { text: text.into() });
        fills.insert("subtitle".into(), FilledContent::Text { text: "by A. Speaker".into() });
        Slide { template_id: "title".into(), fills, meta: meta("cat") }
    }

    pub fn picture_slide(locator: &str) -> Slide {
        let mut fills = BTreeMap::new();
        fills.insert("title".into(), FilledContent::Text { text: "Look".into() });
        fills.insert(
            "image".into(),
            FilledContent::Image {
                asset: ImageAsset {
                    asset_id: format!("t:{locator}"),
                    locator: locator.into(),
                    media_kind: if locator.ends_with(".gif") { MediaKind::Animated } else { MediaKind::Still },
                    attribution: String::new(),
                },
            },
        );
        Slide { template_id: "picture".into(), fills, meta: meta("rug") }
    }

    pub fn chart_slide(kind: ChartKind) -> Slide {
        let data = match kind {
            ChartKind::Scatter => ChartData::Points((1..=5).map(|x| (x as f64, (x * x) as f64)).collect()),
            _ => ChartData::Categories(vec![("Yes".into(), 50.0), ("No".into(), 30.0), ("Maybe".into(), 20.0)]),
        };
        let mut fills = BTreeMap::new();
        fills.insert(
            "chart".into(),
            FilledContent::Chart { chart: ChartSpec { kind, title: "Do cats <rule>?".into(), data, axis_labels: Some(("x".into(), "y".into())) } },
        );
        Slide { template_id: "chart".into(), fills, meta: meta("rug") }
    }

    pub fn deck(slides: Vec<Slide>) -> Deck {
        Deck { topic: Topic::new("cat").unwrap(), slides, schema_name: "t".into(), master_rng_seed: 1 }
    }

    /// A 1x1 PNG.
    pub const PNG: &[u8] = &[
        0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01,
        0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1F, 0x15, 0xC4, 0x89, 0x00, 0x00, 0x00, 0x0D, 0x49, 0x44, 0x41,
        0x54, 0x78, 0x9C, 0x63, 0xF8, 0xCF, 0xC0, 0xF0, 0x1F, 0x00, 0x05, 0x00, 0x01, 0xFF, 0x89, 0x99, 0x3D, 0x1D, 0x00, 0x00,
        0x00, 0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82,
    ];
}
