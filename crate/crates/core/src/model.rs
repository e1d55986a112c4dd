//! Shared domain vocabulary: topics, tags, templates, slides and decks, plus
//! deck-level validation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::ChartSpec;
use crate::schema::PresentationSchema;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("topic must be a non-empty single-line token, got {0:?}")]
    InvalidTopic(String),
    #[error("tag must be a lowercase identifier, got {0:?}")]
    InvalidTag(String),
    #[error("template {template}: duplicate placeholder id {id:?}")]
    DuplicatePlaceholder { template: String, id: String },
    #[error("template {template}: placeholder {id:?} geometry outside the unit square")]
    BadGeometry { template: String, id: String },
    #[error("tag cap for {tag}: {reason}")]
    BadCap { tag: String, reason: String },
}

/// The audience-supplied main topic. Stored trimmed and lowercased.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Topic(String);

impl Topic {
    pub fn new(word: &str) -> Result<Self, ModelError> {
        let trimmed = word.trim();
        if trimmed.is_empty() || trimmed.contains(['\n', '\r']) {
            return Err(ModelError::InvalidTopic(word.to_string()));
        }
        Ok(Topic(trimmed.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Topic {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Topic::new(&value)
    }
}

impl From<Topic> for String {
    fn from(t: Topic) -> String {
        t.0
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tag(String);

impl Tag {
    pub fn new(name: &str) -> Result<Self, ModelError> {
        let ok = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            && name.chars().next().is_some_and(|c| c.is_ascii_lowercase());
        if ok {
            Ok(Tag(name.to_string()))
        } else {
            Err(ModelError::InvalidTag(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Tag {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Tag::new(&value)
    }
}

impl From<Tag> for String {
    fn from(t: Tag) -> String {
        t.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceholderKind {
    TitleText,
    SubtitleText,
    BodyText,
    CaptionText,
    Image,
    Chart,
}

impl PlaceholderKind {
    pub fn is_text(self) -> bool {
        matches!(
            self,
            Self::TitleText | Self::SubtitleText | Self::BodyText | Self::CaptionText
        )
    }
}

/// Fractional placement within the slide area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Frame {
    pub const fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        Frame { x, y, width, height }
    }

    fn in_unit_square(&self) -> bool {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        unit(self.x) && unit(self.y) && unit(self.width) && unit(self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placeholder {
    pub id: String,
    pub kind: PlaceholderKind,
    pub frame: Frame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideTemplate {
    pub template_id: String,
    pub placeholders: Vec<Placeholder>,
}

impl SlideTemplate {
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = std::collections::HashSet::new();
        for p in &self.placeholders {
            if !seen.insert(p.id.as_str()) {
                return Err(ModelError::DuplicatePlaceholder {
                    template: self.template_id.clone(),
                    id: p.id.clone(),
                });
            }
            if !p.frame.in_unit_square() {
                return Err(ModelError::BadGeometry {
                    template: self.template_id.clone(),
                    id: p.id.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn placeholder(&self, id: &str) -> Option<&Placeholder> {
        self.placeholders.iter().find(|p| p.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapKind {
    Absolute,
    FractionOfDeck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagCap {
    pub tag: Tag,
    pub cap_kind: CapKind,
    pub value: f64,
}

impl TagCap {
    pub fn absolute(tag: Tag, count: u32) -> Self {
        TagCap { tag, cap_kind: CapKind::Absolute, value: count as f64 }
    }

    pub fn fraction(tag: Tag, fraction: f64) -> Self {
        TagCap { tag, cap_kind: CapKind::FractionOfDeck, value: fraction }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::BadCap {
            tag: self.tag.to_string(),
            reason: reason.to_string(),
        };
        match self.cap_kind {
            CapKind::Absolute if self.value < 0.0 || self.value.fract() != 0.0 => {
                Err(bad("absolute caps must be non-negative integers"))
            }
            CapKind::FractionOfDeck if !(self.value > 0.0 && self.value <= 1.0) => {
                Err(bad("fraction caps must lie in (0, 1]"))
            }
            _ => Ok(()),
        }
    }

    /// Number of slides carrying the tag a deck of `deck_len` slides may hold.
    /// Fractions round down.
    pub fn allowed(&self, deck_len: usize) -> usize {
        match self.cap_kind {
            CapKind::Absolute => self.value as usize,
            // the epsilon absorbs products like 0.35 * 20 = 6.9999999
            CapKind::FractionOfDeck => (self.value * deck_len as f64 + 1e-9).floor() as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Still,
    Animated,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageAsset {
    /// Source name plus canonical locator; identical for the same asset in every run.
    pub asset_id: String,
    /// Corpus-relative path (offline) or URL (online).
    pub locator: String,
    pub media_kind: MediaKind,
    pub attribution: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilledContent {
    Text { text: String },
    Image { asset: ImageAsset },
    Chart { chart: ChartSpec },
}

impl FilledContent {
    pub fn fits(&self, kind: PlaceholderKind) -> bool {
        match self {
            FilledContent::Text { .. } => kind.is_text(),
            FilledContent::Image { .. } => kind == PlaceholderKind::Image,
            FilledContent::Chart { .. } => kind == PlaceholderKind::Chart,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideMeta {
    pub seed: String,
    pub generator: String,
    pub round: usize,
    pub tags: Vec<Tag>,
    /// The seed walk found no usable neighbour and substituted the topic.
    #[serde(default)]
    pub seed_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slide {
    pub template_id: String,
    pub fills: BTreeMap<String, FilledContent>,
    pub meta: SlideMeta,
}

impl Slide {
    pub fn image_assets(&self) -> impl Iterator<Item = &ImageAsset> {
        self.fills.values().filter_map(|f| match f {
            FilledContent::Image { asset } => Some(asset),
            _ => None,
        })
    }

    pub fn text(&self, placeholder: &str) -> Option<&str> {
        match self.fills.get(placeholder) {
            Some(FilledContent::Text { text }) => Some(text),
            _ => None,
        }
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.meta.tags.iter().any(|t| t.as_str() == tag)
    }

    /// Checks that the fills match the template exactly: one fill per
    /// placeholder, of the right kind, and nothing else.
    pub fn matches_template(&self, template: &SlideTemplate) -> bool {
        self.fills.len() == template.placeholders.len()
            && template.placeholders.iter().all(|p| {
                self.fills
                    .get(&p.id)
                    .is_some_and(|fill| fill.fits(p.kind))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deck {
    pub topic: Topic,
    pub slides: Vec<Slide>,
    pub schema_name: String,
    pub master_rng_seed: u64,
}

impl Deck {
    pub fn len(&self) -> usize {
        self.slides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slides.is_empty()
    }
}

/// A cross-slide constraint broken by a deck. `slide` is always the slide
/// that should be regenerated to fix it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateImage { asset_id: String, first_slide: usize, slide: usize },
    TagOverCap { tag: Tag, allowed: usize, slide: usize },
    TopicGap { previous: usize, slide: usize, gap: usize },
    OffTopicEndpoint { slide: usize },
}

impl Violation {
    pub fn slide(&self) -> usize {
        match self {
            Violation::DuplicateImage { slide, .. }
            | Violation::TagOverCap { slide, .. }
            | Violation::TopicGap { slide, .. }
            | Violation::OffTopicEndpoint { slide } => *slide,
        }
    }

    /// Whether regenerating the slide content can resolve this violation.
    /// Seed placement problems cannot be repaired by regeneration.
    pub fn is_content_level(&self) -> bool {
        matches!(self, Violation::DuplicateImage { .. } | Violation::TagOverCap { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateImage { asset_id, first_slide, slide } => write!(
                f,
                "slide {slide} reuses image {asset_id} from slide {first_slide}"
            ),
            Violation::TagOverCap { tag, allowed, slide } => {
                write!(f, "slide {slide} exceeds the cap of {allowed} for tag {tag}")
            }
            Violation::TopicGap { previous, slide, gap } => write!(
                f,
                "topic returns at slide {slide}, {gap} slides after slide {previous}"
            ),
            Violation::OffTopicEndpoint { slide } => write!(f, "slide {slide} is not on topic"),
        }
    }
}

/// Running tally used by both the validator and the assembler's sweep.
#[derive(Debug, Default, Clone)]
pub(crate) struct ContentTally {
    pub images: HashMap<String, usize>,
    pub tags: HashMap<Tag, usize>,
}

impl ContentTally {
    /// Returns the content-level violations `slide` would introduce if added
    /// after everything already tallied.
    pub fn check(
        &self,
        index: usize,
        slide: &Slide,
        schema: &PresentationSchema,
        deck_len: usize,
    ) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut local: HashMap<&str, usize> = HashMap::new();
        for asset in slide.image_assets() {
            if let Some(&first) = self.images.get(&asset.asset_id) {
                out.push(Violation::DuplicateImage {
                    asset_id: asset.asset_id.clone(),
                    first_slide: first,
                    slide: index,
                });
            } else if local.insert(asset.asset_id.as_str(), index).is_some() {
                out.push(Violation::DuplicateImage {
                    asset_id: asset.asset_id.clone(),
                    first_slide: index,
                    slide: index,
                });
            }
        }
        for tag in distinct_tags(slide) {
            if let Some(allowed) = schema.tag_allowance(tag, deck_len) {
                let used = self.tags.get(tag).copied().unwrap_or(0);
                if used + 1 > allowed {
                    out.push(Violation::TagOverCap {
                        tag: tag.clone(),
                        allowed,
                        slide: index,
                    });
                }
            }
        }
        out
    }

    pub fn add(&mut self, index: usize, slide: &Slide) {
        for asset in slide.image_assets() {
            self.images.entry(asset.asset_id.clone()).or_insert(index);
        }
        for tag in distinct_tags(slide) {
            *self.tags.entry(tag.clone()).or_insert(0) += 1;
        }
    }
}

fn distinct_tags(slide: &Slide) -> Vec<&Tag> {
    let mut tags: Vec<&Tag> = slide.meta.tags.iter().collect();
    tags.sort();
    tags.dedup();
    tags
}

/// Reports every constraint the deck breaks under `schema`. An empty result
/// means the deck is valid. Content checks run in slide order, so the later
/// slide of a conflicting pair is the one reported.
pub fn validate_deck(deck: &Deck, schema: &PresentationSchema) -> Vec<Violation> {
    let n = deck.slides.len();
    let mut violations = Vec::new();
    let topic = deck.topic.as_str();

    let mut tally = ContentTally::default();
    for (i, slide) in deck.slides.iter().enumerate() {
        let found = tally.check(i, slide, schema, n);
        // count the slide regardless so later overflows are reported too
        tally.add(i, slide);
        violations.extend(found);
    }

    if n == 0 {
        return violations;
    }
    for end in [0, n - 1] {
        if deck.slides[end].meta.seed != topic
            && !violations
                .iter()
                .any(|v| matches!(v, Violation::OffTopicEndpoint { slide } if *slide == end))
        {
            violations.push(Violation::OffTopicEndpoint { slide: end });
        }
    }

    let (min_gap, max_gap) = (schema.seed_generator.min_gap, schema.seed_generator.max_gap);
    let returns: Vec<usize> = deck
        .slides
        .iter()
        .enumerate()
        .filter(|(_, s)| s.meta.seed == topic && !s.meta.seed_fallback)
        .map(|(i, _)| i)
        .collect();
    for pair in returns.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let gap = q - p;
        let lower_ok = q == n - 1 || gap >= min_gap;
        if !lower_ok || gap > max_gap {
            violations.push(Violation::TopicGap { previous: p, slide: q, gap });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::tests::fixture_schema;

    fn text_slide(seed: &str, tags: &[&str]) -> Slide {
        let mut fills = BTreeMap::new();
        fills.insert(
            "title".to_string(),
            FilledContent::Text { text: format!("about {seed}") },
        );
        Slide {
            template_id: "text".into(),
            fills,
            meta: SlideMeta {
                seed: seed.into(),
                generator: "g".into(),
                round: 0,
                tags: tags.iter().map(|t| Tag::new(t).unwrap()).collect(),
                seed_fallback: false,
            },
        }
    }

    fn image_slide(seed: &str, asset: &str) -> Slide {
        let mut s = text_slide(seed, &["full_image"]);
        s.fills.insert(
            "image".into(),
            FilledContent::Image {
                asset: ImageAsset {
                    asset_id: asset.into(),
                    locator: format!("{asset}.png"),
                    media_kind: MediaKind::Still,
                    attribution: String::new(),
                },
            },
        );
        s
    }

    fn deck(slides: Vec<Slide>) -> Deck {
        Deck {
            topic: Topic::new("cat").unwrap(),
            slides,
            schema_name: "fixture".into(),
            master_rng_seed: 0,
        }
    }

    #[test]
    fn topic_normalises() {
        assert_eq!(Topic::new("  Cat ").unwrap().as_str(), "cat");
        assert!(Topic::new("   ").is_err());
        assert!(Topic::new("a\nb").is_err());
    }

    #[test]
    fn tag_rules() {
        assert!(Tag::new("about_me").is_ok());
        assert!(Tag::new("Quote").is_err());
        assert!(Tag::new("").is_err());
        assert!(Tag::new("1x").is_err());
    }

    #[test]
    fn cap_validation() {
        let t = Tag::new("quote").unwrap();
        assert!(TagCap::fraction(t.clone(), 0.2).validate().is_ok());
        assert!(TagCap::fraction(t.clone(), 0.0).validate().is_err());
        assert!(TagCap::fraction(t.clone(), 1.5).validate().is_err());
        assert!(TagCap { tag: t, cap_kind: CapKind::Absolute, value: 1.5 }
            .validate()
            .is_err());
    }

    #[test]
    fn quote_cap_on_seven_slides() {
        // floor(0.2 * 7) = 1 quote slide allowed
        let schema = fixture_schema();
        let slides = vec![
            text_slide("cat", &["title"]),
            text_slide("rug", &["quote"]),
            text_slide("floor", &["statement"]),
            text_slide("cat", &["quote"]),
            text_slide("rug", &["statement"]),
            text_slide("floor", &["statement"]),
            text_slide("cat", &["conclusion"]),
        ];
        let v = validate_deck(&deck(slides), &schema);
        assert_eq!(
            v,
            vec![Violation::TagOverCap { tag: Tag::new("quote").unwrap(), allowed: 1, slide: 3 }]
        );
    }

    #[test]
    fn single_title_slide_is_valid() {
        let schema = fixture_schema();
        assert!(validate_deck(&deck(vec![text_slide("cat", &["title"])]), &schema).is_empty());
    }

    #[test]
    fn duplicate_image_reported_once() {
        let schema = fixture_schema();
        let slides = vec![
            text_slide("cat", &["title"]),
            image_slide("rug", "a1"),
            image_slide("floor", "shared"),
            text_slide("cat", &["statement"]),
            image_slide("rug", "a2"),
            image_slide("floor", "shared"),
            text_slide("cat", &["conclusion"]),
        ];
        let v = validate_deck(&deck(slides), &schema);
        assert_eq!(
            v,
            vec![Violation::DuplicateImage {
                asset_id: "shared".into(),
                first_slide: 2,
                slide: 5
            }]
        );
    }

    #[test]
    fn off_topic_endpoints_and_gaps() {
        let schema = fixture_schema();
        let slides = vec![
            text_slide("rug", &["title"]),
            text_slide("cat", &["statement"]),
            text_slide("floor", &["statement"]),
        ];
        let v = validate_deck(&deck(slides), &schema);
        assert!(v.contains(&Violation::OffTopicEndpoint { slide: 0 }));
        assert!(v.contains(&Violation::OffTopicEndpoint { slide: 2 }));

        // interior return after one slide is too early; the final return is exempt
        let slides = vec![
            text_slide("cat", &["title"]),
            text_slide("cat", &["statement"]),
            text_slide("rug", &["statement"]),
            text_slide("cat", &["statement"]),
        ];
        let v = validate_deck(&deck(slides), &schema);
        assert_eq!(v, vec![Violation::TopicGap { previous: 0, slide: 1, gap: 1 }]);

        // a gap beyond max_gap (6) is reported even for the final slide
        let mut slides = vec![text_slide("cat", &["title"])];
        for _ in 0..7 {
            slides.push(text_slide("rug", &["statement"]));
        }
        slides.push(text_slide("cat", &["conclusion"]));
        let v = validate_deck(&deck(slides), &schema);
        assert_eq!(v, vec![Violation::TopicGap { previous: 0, slide: 8, gap: 8 }]);
    }

    #[test]
    fn fallback_topic_slides_do_not_count_as_returns() {
        let schema = fixture_schema();
        let mut middle = text_slide("cat", &["statement"]);
        middle.meta.seed_fallback = true;
        let slides = vec![text_slide("cat", &["title"]), middle, text_slide("cat", &["conclusion"])];
        assert!(validate_deck(&deck(slides), &schema).is_empty());
    }

    /// Brute force: the largest k in 0..=n with k/n <= f, using exact
    /// integer arithmetic on percentages.
    fn brute_allowed(percent: u32, n: usize) -> usize {
        (0..=n).filter(|k| (*k as u64) * 100 <= percent as u64 * n as u64).max().unwrap()
    }

    #[test]
    fn fraction_caps_match_brute_force() {
        for percent in 1..=100u32 {
            let cap = TagCap::fraction(Tag::new("x").unwrap(), percent as f64 / 100.0);
            for n in 1..=20 {
                assert_eq!(cap.allowed(n), brute_allowed(percent, n), "{percent}% of {n}");
            }
        }
    }

    #[test]
    fn validation_is_deterministic() {
        let schema = fixture_schema();
        let slides = vec![
            text_slide("cat", &["title"]),
            image_slide("rug", "x"),
            image_slide("rug", "x"),
            text_slide("cat", &["quote"]),
            text_slide("cat", &["quote"]),
        ];
        let d = deck(slides);
        assert_eq!(validate_deck(&d, &schema), validate_deck(&d, &schema));
    }
}
