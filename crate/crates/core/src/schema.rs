//! Presentation schemas: seed-walk settings, the generator roster, tag caps
//! and slide templates, loaded from JSON.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{Binding, SlideGeneratorSpec, WeightFunction};
use crate::model::{ModelError, PlaceholderKind, SlideTemplate, Tag, TagCap};
use crate::seeds::WalkConfig;

pub const TITLE_TAG: &str = "title";

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot read schema {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed schema: {0}")]
    Parse(String),
    #[error("invalid schema: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationSchema {
    pub name: String,
    #[serde(default)]
    pub seed_generator: WalkConfig,
    pub generators: Vec<SlideGeneratorSpec>,
    #[serde(default)]
    pub tag_caps: Vec<TagCap>,
    pub templates: Vec<SlideTemplate>,
    #[serde(default = "seven")]
    pub deck_length_default: usize,
}

fn seven() -> usize {
    7
}

impl PresentationSchema {
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let schema: PresentationSchema = serde_json::from_str(text).map_err(|e| SchemaError::Parse(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SchemaError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn template(&self, id: &str) -> Option<&SlideTemplate> {
        self.templates.iter().find(|t| t.template_id == id)
    }

    pub fn generator(&self, name: &str) -> Option<&SlideGeneratorSpec> {
        self.generators.iter().find(|g| g.name == name)
    }

    /// The roster entry that opens every deck.
    pub fn title_generator(&self) -> Option<&SlideGeneratorSpec> {
        self.generators
            .iter()
            .find(|g| matches!(g.weight_fn, WeightFunction::OnlyFirst { .. }) && g.has_tag(TITLE_TAG))
    }

    /// How many slides carrying `tag` a deck of `deck_len` slides may hold,
    /// or `None` when the tag is uncapped. A cap that rounds down to zero is
    /// raised to one for tags the title generator carries, so the first
    /// slide can always be scheduled.
    pub fn tag_allowance(&self, tag: &Tag, deck_len: usize) -> Option<usize> {
        let allowed = self.tag_caps.iter().filter(|c| &c.tag == tag).map(|c| c.allowed(deck_len)).min()?;
        if allowed == 0 && self.title_generator().is_some_and(|g| g.tags.contains(tag)) {
            return Some(1);
        }
        Some(allowed)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        let invalid = |m: String| Err(SchemaError::Invalid(m));
        if !self.seed_generator.is_valid() {
            return invalid("seed_generator needs 1 <= min_gap <= max_gap".into());
        }
        if self.deck_length_default == 0 {
            return invalid("deck_length_default must be positive".into());
        }
        if self.generators.is_empty() {
            return invalid("generator roster is empty".into());
        }
        for cap in &self.tag_caps {
            cap.validate()?;
        }
        let mut template_ids = HashSet::new();
        for t in &self.templates {
            t.validate()?;
            if !template_ids.insert(t.template_id.as_str()) {
                return invalid(format!("duplicate template {}", t.template_id));
            }
        }
        let mut names = HashSet::new();
        for g in &self.generators {
            if !names.insert(g.name.as_str()) {
                return invalid(format!("duplicate generator {}", g.name));
            }
            if g.tags.is_empty() {
                return invalid(format!("generator {} has no tags", g.name));
            }
            if !g.weight_fn.is_valid() {
                return invalid(format!("generator {} has an invalid weight function", g.name));
            }
            if g.max_per_deck == Some(0) {
                return invalid(format!("generator {} has max_per_deck 0", g.name));
            }
            let Some(t) = self.template(&g.template_id) else {
                return invalid(format!("generator {} uses unknown template {}", g.name, g.template_id));
            };
            check_bindings(g, t)?;
        }
        let titles = self
            .generators
            .iter()
            .filter(|g| g.has_tag(TITLE_TAG) && matches!(g.weight_fn, WeightFunction::OnlyFirst { .. }))
            .count();
        if titles != 1 {
            return invalid(format!("expected exactly one first-slide title generator, found {titles}"));
        }
        Ok(())
    }
}

fn check_bindings(g: &SlideGeneratorSpec, t: &SlideTemplate) -> Result<(), SchemaError> {
    let bad = |m: String| Err(SchemaError::Invalid(format!("generator {}: {m}", g.name)));
    let ids: BTreeMap<&str, PlaceholderKind> = t.placeholders.iter().map(|p| (p.id.as_str(), p.kind)).collect();
    for id in ids.keys() {
        if !g.bindings.contains_key(*id) {
            return bad(format!("placeholder {id} is not bound"));
        }
    }
    for (id, binding) in &g.bindings {
        let Some(kind) = ids.get(id.as_str()) else {
            return bad(format!("binding {id} names no placeholder of {}", t.template_id));
        };
        let ok = match binding {
            Binding::Grammar { .. } | Binding::Text { .. } | Binding::Literal { .. } => kind.is_text(),
            Binding::Image { .. } => *kind == PlaceholderKind::Image,
            Binding::Chart { .. } => *kind == PlaceholderKind::Chart,
            Binding::Tuple { .. } => kind.is_text() || *kind == PlaceholderKind::Image,
        };
        if !ok {
            return bad(format!("binding {id} does not fit a {kind:?} placeholder"));
        }
    }
    Ok(())
}
