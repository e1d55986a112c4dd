//! Sources whose items are sampled jointly: caption pairs with one image
//! each, and linked tuples where generated text drives the next fetch.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use rand::RngCore;

use super::{ContentSource, Fetched, Item, SourceError, SourceInfo, SourceKind};
use crate::rng::pick_index;

pub trait TupledSource: Send + Sync {
    fn info(&self) -> &SourceInfo;

    /// Captioned parts in presentation order. Image assets in `exclude`, and
    /// those already fetched for earlier parts, are avoided where possible.
    fn fetch_parts(
        &self,
        seed: &str,
        rng: &mut dyn RngCore,
        exclude: &HashSet<String>,
    ) -> Result<Vec<(String, Fetched)>, SourceError>;
}

pub fn fetch_tuple(
    source: &dyn TupledSource,
    seed: &str,
    rng: &mut dyn RngCore,
) -> Result<Vec<(String, Fetched)>, SourceError> {
    if source.info().kind != SourceKind::Tupled {
        return Err(SourceError::WrongKind {
            name: source.info().name.clone(),
            expected: SourceKind::Tupled,
            actual: source.info().kind,
        });
    }
    source.fetch_parts(seed, rng, &HashSet::new())
}

fn note(seen: &mut HashSet<String>, f: &Fetched) {
    if let Some(id) = f.item.asset_id() {
        seen.insert(id.to_string());
    }
}

/// Rows of captions (e.g. `Expectation<TAB>Reality`), each caption paired
/// with an image from its child. The last caption always uses the last
/// child, so a punchline can come from a different flavour.
pub struct CaptionTupleSource {
    info: SourceInfo,
    rows: Vec<Vec<String>>,
    children: Vec<Arc<dyn ContentSource>>,
}

impl CaptionTupleSource {
    pub fn new(info: SourceInfo, rows: Vec<Vec<String>>, children: Vec<Arc<dyn ContentSource>>) -> Self {
        CaptionTupleSource { info, rows, children }
    }

    /// Tab-separated rows; only rows with exactly `width` captions are kept.
    pub fn parse_rows(text: &str, width: usize) -> Vec<Vec<String>> {
        text.lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| l.split('\t').map(|c| c.trim().to_string()).collect::<Vec<_>>())
            .filter(|r| r.len() == width && r.iter().all(|c| !c.is_empty()))
            .collect()
    }

    pub fn load_rows(path: &Path, width: usize) -> Result<Vec<Vec<String>>, SourceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SourceError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        Ok(Self::parse_rows(&text, width))
    }

    fn child_for(&self, i: usize, width: usize) -> &Arc<dyn ContentSource> {
        let last = self.children.len() - 1;
        if i + 1 == width {
            &self.children[last]
        } else {
            &self.children[i.min(last)]
        }
    }
}

impl TupledSource for CaptionTupleSource {
    fn info(&self) -> &SourceInfo {
        &self.info
    }

    fn fetch_parts(
        &self,
        seed: &str,
        rng: &mut dyn RngCore,
        exclude: &HashSet<String>,
    ) -> Result<Vec<(String, Fetched)>, SourceError> {
        let empty = || SourceError::SourceEmpty(self.info.name.clone());
        if self.children.is_empty() {
            return Err(empty());
        }
        let row = &self.rows[pick_index(self.rows.len(), rng).ok_or_else(empty)?];
        let mut seen = exclude.clone();
        let mut parts = Vec::with_capacity(row.len());
        for (i, caption) in row.iter().enumerate() {
            let mut f = self.child_for(i, row.len()).fetch(seed, rng, &seen)?;
            note(&mut seen, &f);
            f.tags.extend(self.info.tags.iter().cloned());
            parts.push((caption.clone(), f));
        }
        Ok(parts)
    }
}

#[derive(Clone)]
pub struct LinkedPart {
    /// Caption template; `{}` is replaced by the lead text.
    pub caption: String,
    pub source: Arc<dyn ContentSource>,
}

impl LinkedPart {
    pub fn new(caption: &str, source: Arc<dyn ContentSource>) -> Self {
        LinkedPart { caption: caption.to_string(), source }
    }
}

/// A lead text fetched with the slide seed, then followers fetched with the
/// lead text as their seed (a generated job drives the matching image).
pub struct LinkedTupleSource {
    info: SourceInfo,
    lead: LinkedPart,
    followers: Vec<LinkedPart>,
}

impl LinkedTupleSource {
    pub fn new(info: SourceInfo, lead: LinkedPart, followers: Vec<LinkedPart>) -> Self {
        LinkedTupleSource { info, lead, followers }
    }
}

impl TupledSource for LinkedTupleSource {
    fn info(&self) -> &SourceInfo {
        &self.info
    }

    fn fetch_parts(
        &self,
        seed: &str,
        rng: &mut dyn RngCore,
        exclude: &HashSet<String>,
    ) -> Result<Vec<(String, Fetched)>, SourceError> {
        let mut seen = exclude.clone();
        let mut lead = self.lead.source.fetch(seed, rng, &seen)?;
        note(&mut seen, &lead);
        let Item::Text { text } = &lead.item else {
            return Err(SourceError::WrongKind {
                name: self.lead.source.info().name.clone(),
                expected: SourceKind::Text,
                actual: SourceKind::Image,
            });
        };
        let lead_text = text.clone();
        lead.tags.extend(self.info.tags.iter().cloned());
        let mut parts = vec![(self.lead.caption.replace("{}", &lead_text), lead)];
        for part in &self.followers {
            let mut f = part.source.fetch(&lead_text, rng, &seen)?;
            note(&mut seen, &f);
            f.tags.extend(self.info.tags.iter().cloned());
            parts.push((part.caption.replace("{}", &lead_text), f));
        }
        Ok(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::sources::tests::{text_source, FakeSearch};
    use crate::sources::{Flavour, LookupSource, Provider};
    use std::sync::Mutex;

    fn tupled(name: &str) -> SourceInfo {
        SourceInfo::new(name, SourceKind::Tupled, Flavour::Neutral)
    }

    fn images(name: &str, ids: &[&str]) -> Arc<dyn ContentSource> {
        Arc::new(LookupSource::new(
            SourceInfo::new(name, SourceKind::Image, Flavour::Neutral),
            Arc::new(FakeSearch::images(ids, ids)),
        ))
    }

    #[test]
    fn single_caption_pair() {
        let rows = CaptionTupleSource::parse_rows("Expectation\tReality\nonly one\n", 2);
        let src = CaptionTupleSource::new(tupled("captions"), rows, vec![images("stock", &["a", "b", "c"]), images("odd", &["o"])]);
        let parts = fetch_tuple(&src, "cat", &mut rng_from_seed(1)).unwrap();
        let captions: Vec<&str> = parts.iter().map(|(c, _)| c.as_str()).collect();
        assert_eq!(captions, ["Expectation", "Reality"]);
        assert!(matches!(parts[0].1.item, Item::Image { .. }));
        assert_eq!(parts[1].1.item.asset_id(), Some("fake:o"));
    }

    #[test]
    fn parts_avoid_each_other() {
        let rows = CaptionTupleSource::parse_rows("a\tb\tc\n", 3);
        let src = CaptionTupleSource::new(tupled("t"), rows, vec![images("stock", &["x", "y", "z"])]);
        for s in 0..20 {
            let parts = fetch_tuple(&src, "cat", &mut rng_from_seed(s)).unwrap();
            let ids: HashSet<&str> = parts.iter().filter_map(|(_, f)| f.item.asset_id()).collect();
            assert_eq!(ids.len(), 3);
        }
    }

    #[test]
    fn empty_table() {
        let src = CaptionTupleSource::new(tupled("t"), vec![], vec![images("stock", &["x"])]);
        assert_eq!(fetch_tuple(&src, "cat", &mut rng_from_seed(0)).unwrap_err(), SourceError::SourceEmpty("t".into()));
    }

    /// Records the seeds it was searched with.
    struct SeedSpy(Mutex<Vec<String>>, Arc<[Item]>);

    impl Provider for SeedSpy {
        fn search(&self, seed: &str) -> Result<Vec<Item>, SourceError> {
            self.0.lock().unwrap().push(seed.to_string());
            Ok(self.1.to_vec())
        }
        fn pool(&self) -> Result<Arc<[Item]>, SourceError> {
            Ok(self.1.clone())
        }
        fn cache_name(&self) -> &str {
            "spy"
        }
    }

    #[test]
    fn job_drives_image_seed() {
        let spy = Arc::new(SeedSpy(Mutex::new(vec![]), vec![Item::Image { asset: crate::sources::tests::asset("b") }].into()));
        let img = Arc::new(LookupSource::new(SourceInfo::new("img", SourceKind::Image, Flavour::Neutral), spy.clone()));
        let src = LinkedTupleSource::new(
            tupled("job"),
            LinkedPart::new("I work as a {}", Arc::new(text_source("jobs", "baker\n"))),
            vec![LinkedPart::new("", img)],
        );
        let parts = fetch_tuple(&src, "cat", &mut rng_from_seed(0)).unwrap();
        assert_eq!(parts[0].0, "I work as a baker");
        assert_eq!(spy.0.lock().unwrap().as_slice(), ["baker"]);
        assert_eq!(parts[1].1.item.asset_id(), Some("fake:b"));
    }

    #[test]
    fn wrong_kind() {
        struct NotTupled(SourceInfo);
        impl TupledSource for NotTupled {
            fn info(&self) -> &SourceInfo {
                &self.0
            }
            fn fetch_parts(&self, _: &str, _: &mut dyn RngCore, _: &HashSet<String>) -> Result<Vec<(String, Fetched)>, SourceError> {
                Ok(vec![])
            }
        }
        let s = NotTupled(SourceInfo::new("x", SourceKind::Text, Flavour::Neutral));
        assert!(matches!(fetch_tuple(&s, "a", &mut rng_from_seed(0)), Err(SourceError::WrongKind { .. })));
    }
}
