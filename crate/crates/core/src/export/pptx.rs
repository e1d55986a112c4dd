//! Minimal Office Open XML presentation writer: one master, one blank
//! layout, and explicitly positioned shapes on every slide.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{Seek, Write};
use std::path::Path;

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

use super::{media_extension, mime_type, xml_escape, ExportContext, ExportError, ExportOptions, TimestampPolicy};
use crate::chart::{ChartKind, ChartSpec};
use crate::model::{Deck, FilledContent, Frame, ImageAsset, PlaceholderKind};
use crate::net::sha256_hex;

/// Angles in DrawingML are measured in 60000ths of a degree.
pub const ANGLE_UNITS_PER_TURN: i64 = 21_600_000;

const NS: &str = r#"xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main""#;
const XML_DECL: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
const REL_NS: &str = "http://schemas.openxmlformats.org/package/2006/relationships";
const OFFICE_REL: &str = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";
const PALETTE: &[&str] = &["4472C4", "ED7D31", "A5A5A5", "FFC000", "5B9BD5", "70AD47", "264478", "9E480E"];
const GROUP_HEADER: &str = r#"<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr><p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/><a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>"#;

/// Start and end angle of each wedge, starting at 0 and rounding the
/// cumulative sums so the spans add up to exactly one turn.
pub fn pie_angles(values: &[f64]) -> Vec<(i64, i64)> {
    let total: f64 = values.iter().filter(|v| v.is_finite() && **v > 0.0).sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(values.len());
    let mut cum = 0.0;
    let mut start = 0;
    for (i, v) in values.iter().enumerate() {
        cum += if v.is_finite() && *v > 0.0 { *v } else { 0.0 };
        let end = if i + 1 == values.len() {
            ANGLE_UNITS_PER_TURN
        } else {
            (cum / total * ANGLE_UNITS_PER_TURN as f64).round() as i64
        };
        out.push((start, end));
        start = end;
    }
    out
}

#[derive(Clone, Copy)]
struct Rect {
    x: i64,
    y: i64,
    w: i64,
    h: i64,
}

impl Rect {
    fn from_frame(f: &Frame, size: (i64, i64)) -> Rect {
        let s = |v: f64, total: i64| (v * total as f64).round() as i64;
        Rect { x: s(f.x, size.0), y: s(f.y, size.1), w: s(f.width, size.0).max(1), h: s(f.height, size.1).max(1) }
    }

    fn sub(&self, fx: f64, fy: f64, fw: f64, fh: f64) -> Rect {
        Rect {
            x: self.x + (fx * self.w as f64).round() as i64,
            y: self.y + (fy * self.h as f64).round() as i64,
            w: ((fw * self.w as f64).round() as i64).max(1),
            h: ((fh * self.h as f64).round() as i64).max(1),
        }
    }

    fn xfrm(&self) -> String {
        format!(r#"<a:xfrm><a:off x="{}" y="{}"/><a:ext cx="{}" cy="{}"/></a:xfrm>"#, self.x, self.y, self.w, self.h)
    }
}

/// Pixel size from a PNG or GIF header.
fn image_size(bytes: &[u8]) -> Option<(u32, u32)> {
    if bytes.len() >= 24 && bytes.starts_with(b"\x89PNG") {
        let w = u32::from_be_bytes(bytes[16..20].try_into().ok()?);
        let h = u32::from_be_bytes(bytes[20..24].try_into().ok()?);
        return (w > 0 && h > 0).then_some((w, h));
    }
    if bytes.len() >= 10 && bytes.starts_with(b"GIF8") {
        let w = u16::from_le_bytes([bytes[6], bytes[7]]) as u32;
        let h = u16::from_le_bytes([bytes[8], bytes[9]]) as u32;
        return (w > 0 && h > 0).then_some((w, h));
    }
    None
}

/// Largest rectangle with the image's aspect ratio centred in `r`.
fn contain(r: Rect, size: Option<(u32, u32)>) -> Rect {
    let Some((iw, ih)) = size else { return r };
    let scale = (r.w as f64 / iw as f64).min(r.h as f64 / ih as f64);
    let w = ((iw as f64 * scale).round() as i64).max(1);
    let h = ((ih as f64 * scale).round() as i64).max(1);
    Rect { x: r.x + (r.w - w) / 2, y: r.y + (r.h - h) / 2, w, h }
}

struct SlideXml {
    body: String,
    next_id: u32,
    rels: Vec<(String, String, String, bool)>,
}

impl SlideXml {
    fn new() -> Self {
        SlideXml {
            body: String::new(),
            next_id: 2,
            rels: vec![(
                "rId1".into(),
                format!("{OFFICE_REL}/slideLayout"),
                "../slideLayouts/slideLayout1.xml".into(),
                false,
            )],
        }
    }

    fn id(&mut self) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn text(&mut self, r: Rect, text: &str, size_pt: u32, bold: bool, align: &str) {
        let id = self.id();
        let paragraphs: String = text
            .split('\n')
            .map(|line| {
                format!(
                    r#"<a:p><a:pPr algn="{align}"/><a:r><a:rPr lang="en-US" sz="{}" b="{}" dirty="0"/><a:t>{}</a:t></a:r></a:p>"#,
                    size_pt * 100,
                    u8::from(bold),
                    xml_escape(line)
                )
            })
            .collect();
        let _ = write!(
            self.body,
            r#"<p:sp><p:nvSpPr><p:cNvPr id="{id}" name="Text {id}"/><p:cNvSpPr txBox="1"/><p:nvPr/></p:nvSpPr><p:spPr>{}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom><a:noFill/></p:spPr><p:txBody><a:bodyPr wrap="square" rtlCol="0" anchor="ctr"><a:normAutofit/></a:bodyPr><a:lstStyle/>{paragraphs}</p:txBody></p:sp>"#,
            r.xfrm()
        );
    }

    fn shape(&mut self, r: Rect, prst: &str, adjust: &[(&str, i64)], color: &str) {
        let id = self.id();
        let av: String = adjust.iter().map(|(n, v)| format!(r#"<a:gd name="{n}" fmla="val {v}"/>"#)).collect();
        let _ = write!(
            self.body,
            r#"<p:sp><p:nvSpPr><p:cNvPr id="{id}" name="Shape {id}"/><p:cNvSpPr/><p:nvPr/></p:nvSpPr><p:spPr>{}<a:prstGeom prst="{prst}"><a:avLst>{av}</a:avLst></a:prstGeom><a:solidFill><a:srgbClr val="{color}"/></a:solidFill><a:ln><a:noFill/></a:ln></p:spPr></p:sp>"#,
            r.xfrm()
        );
    }

    fn picture(&mut self, r: Rect, rel_id: &str, descr: &str, external: bool) {
        let id = self.id();
        let blip = if external { format!(r#"<a:blip r:link="{rel_id}"/>"#) } else { format!(r#"<a:blip r:embed="{rel_id}"/>"#) };
        let _ = write!(
            self.body,
            r#"<p:pic><p:nvPicPr><p:cNvPr id="{id}" name="Picture {id}" descr="{}"/><p:cNvPicPr><a:picLocks noChangeAspect="1"/></p:cNvPicPr><p:nvPr/></p:nvPicPr><p:blipFill>{blip}<a:stretch><a:fillRect/></a:stretch></p:blipFill><p:spPr>{}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>"#,
            xml_escape(descr),
            r.xfrm()
        );
    }

    fn chart(&mut self, r: Rect, chart: &ChartSpec) {
        self.text(r.sub(0.0, 0.0, 1.0, 0.12), &chart.title, 24, true, "ctr");
        let plot = r.sub(0.05, 0.15, 0.9, 0.7);
        match chart.kind {
            ChartKind::Histogram => {
                let cats = chart.categories();
                let max = cats.iter().map(|(_, v)| *v).fold(0.0, f64::max);
                let slot = 1.0 / cats.len().max(1) as f64;
                for (i, (label, v)) in cats.iter().enumerate() {
                    let frac = if max > 0.0 { v / max } else { 0.0 };
                    let x = i as f64 * slot + slot * 0.2;
                    self.shape(plot.sub(x, 1.0 - frac, slot * 0.6, frac.max(0.001)), "rect", &[], PALETTE[i % PALETTE.len()]);
                    self.text(r.sub(0.05 + 0.9 * i as f64 * slot, 0.86, 0.9 * slot, 0.12), label, 14, false, "ctr");
                }
            }
            ChartKind::Pie => {
                let cats = chart.categories();
                let d = plot.h.min(plot.w / 2);
                let disc = Rect { x: plot.x, y: plot.y + (plot.h - d) / 2, w: d, h: d };
                let values: Vec<f64> = cats.iter().map(|(_, v)| *v).collect();
                for (i, (start, end)) in pie_angles(&values).into_iter().enumerate() {
                    if end == start {
                        continue;
                    }
                    let color = PALETTE[i % PALETTE.len()];
                    if end - start == ANGLE_UNITS_PER_TURN {
                        self.shape(disc, "ellipse", &[], color);
                    } else {
                        self.shape(disc, "pie", &[("adj1", start), ("adj2", end % ANGLE_UNITS_PER_TURN)], color);
                    }
                }
                let legend = Rect { x: plot.x + d + plot.w / 20, y: plot.y, w: plot.w - d - plot.w / 20, h: plot.h };
                let row = 1.0 / cats.len().max(1) as f64;
                for (i, (label, v)) in cats.iter().enumerate() {
                    self.shape(legend.sub(0.0, i as f64 * row + row * 0.3, 0.04, row * 0.4), "rect", &[], PALETTE[i % PALETTE.len()]);
                    self.text(legend.sub(0.06, i as f64 * row, 0.94, row), &format!("{label} ({v:.0}%)"), 16, false, "l");
                }
            }
            ChartKind::Scatter => {
                let pts = chart.points();
                let (xmin, xmax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), (x, _)| (a.min(*x), b.max(*x)));
                let (ymin, ymax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), (_, y)| (a.min(*y), b.max(*y)));
                let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
                self.shape(plot.sub(0.0, 0.995, 1.0, 0.005), "rect", &[], "404040");
                self.shape(plot.sub(0.0, 0.0, 0.003, 1.0), "rect", &[], "404040");
                let dot = 0.015;
                for (x, y) in pts {
                    let fx = (x - xmin) / span(xmin, xmax) * (1.0 - dot);
                    let fy = (1.0 - (y - ymin) / span(ymin, ymax)) * (1.0 - dot);
                    self.shape(plot.sub(fx, fy, dot, dot * plot.w as f64 / plot.h as f64), "ellipse", &[], PALETTE[0]);
                }
                if let Some((xl, yl)) = &chart.axis_labels {
                    self.text(r.sub(0.05, 0.87, 0.9, 0.1), xl, 14, false, "ctr");
                    self.text(r.sub(0.0, 0.15, 0.05, 0.7), yl, 14, false, "ctr");
                }
            }
        }
    }

    fn rels_xml(&self) -> String {
        let mut s = format!("{XML_DECL}<Relationships xmlns=\"{REL_NS}\">");
        for (id, ty, target, external) in &self.rels {
            let mode = if *external { r#" TargetMode="External""# } else { "" };
            let _ = write!(s, r#"<Relationship Id="{id}" Type="{ty}" Target="{}"{mode}/>"#, xml_escape(target));
        }
        s.push_str("</Relationships>");
        s
    }

    fn xml(&self) -> String {
        format!(
            "{XML_DECL}<p:sld {NS}><p:cSld><p:spTree>{GROUP_HEADER}{}</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>",
            self.body
        )
    }
}

fn text_size(kind: PlaceholderKind) -> (u32, bool) {
    match kind {
        PlaceholderKind::TitleText => (40, true),
        PlaceholderKind::SubtitleText => (24, false),
        PlaceholderKind::BodyText => (28, false),
        _ => (18, false),
    }
}

/// Embedded media, deduplicated by content hash.
#[derive(Default)]
struct Media {
    by_hash: HashMap<String, String>,
    parts: BTreeMap<String, Vec<u8>>,
    extensions: BTreeMap<&'static str, ()>,
}

impl Media {
    fn add(&mut self, bytes: Vec<u8>, ext: &'static str) -> String {
        let hash = sha256_hex(&bytes);
        if let Some(name) = self.by_hash.get(&hash) {
            return name.clone();
        }
        let name = format!("image{}.{ext}", self.by_hash.len() + 1);
        self.by_hash.insert(hash, name.clone());
        self.parts.insert(format!("ppt/media/{name}"), bytes);
        self.extensions.insert(ext, ());
        name
    }
}

fn w3c_time(policy: TimestampPolicy) -> (String, DateTime) {
    match policy {
        TimestampPolicy::FixedEpoch => ("1980-01-01T00:00:00Z".into(), DateTime::default()),
        TimestampPolicy::SystemClock => {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs() as i64)
                .unwrap_or(0);
            let (y, m, d) = civil_from_days(secs.div_euclid(86_400));
            let rem = secs.rem_euclid(86_400);
            let (hh, mm, ss) = (rem / 3600, rem % 3600 / 60, rem % 60);
            let zip_time = DateTime::from_date_and_time(y as u16, m as u8, d as u8, hh as u8, mm as u8, ss as u8)
                .unwrap_or_default();
            (format!("{y:04}-{m:02}-{d:02}T{hh:02}:{mm:02}:{ss:02}Z"), zip_time)
        }
    }
}

/// Days since 1970-01-01 to a proleptic Gregorian date.
fn civil_from_days(z: i64) -> (i64, i64, i64) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    (yoe + era * 400 + i64::from(m <= 2), m, d)
}

fn file_uri(path: &Path) -> String {
    let abs = std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
    format!("file://{}", abs.display())
}

/// Writes the presentation package for `deck` into `out`.
pub fn write_pptx<W: Write + Seek>(
    deck: &Deck,
    ctx: &ExportContext,
    options: &ExportOptions,
    out: W,
) -> Result<W, ExportError> {
    options.validate()?;
    let size = options.slide_size;
    let mut parts: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let mut media = Media::default();
    let n = deck.slides.len();

    for (k, slide) in deck.slides.iter().enumerate() {
        let template = ctx.template(k, &slide.template_id)?;
        let mut sx = SlideXml::new();
        for p in &template.placeholders {
            let r = Rect::from_frame(&p.frame, size);
            match slide.fills.get(&p.id) {
                Some(FilledContent::Text { text }) => {
                    let (pt, bold) = text_size(p.kind);
                    sx.text(r, text, pt, bold, "ctr");
                }
                Some(FilledContent::Image { asset }) => {
                    let rel_id = format!("rId{}", sx.rels.len() + 1);
                    if options.embed_media {
                        let bytes = ctx.read_media(asset, options.max_media_bytes)?;
                        let fitted = contain(r, image_size(&bytes));
                        let name = media.add(bytes, media_extension(&asset.locator));
                        sx.rels.push((rel_id.clone(), format!("{OFFICE_REL}/image"), format!("../media/{name}"), false));
                        sx.picture(fitted, &rel_id, &asset.asset_id, false);
                    } else {
                        let target = external_target(ctx, asset)?;
                        sx.rels.push((rel_id.clone(), format!("{OFFICE_REL}/image"), target, true));
                        sx.picture(r, &rel_id, &asset.asset_id, true);
                    }
                }
                Some(FilledContent::Chart { chart }) => sx.chart(r, chart),
                None => {}
            }
        }
        parts.insert(format!("ppt/slides/slide{}.xml", k + 1), sx.xml().into_bytes());
        parts.insert(format!("ppt/slides/_rels/slide{}.xml.rels", k + 1), sx.rels_xml().into_bytes());
    }

    let (created, zip_time) = w3c_time(options.timestamp_policy);
    parts.insert("[Content_Types].xml".into(), content_types(n, &media).into_bytes());
    parts.insert("_rels/.rels".into(), root_rels().into_bytes());
    parts.insert("docProps/core.xml".into(), core_props(deck, &created).into_bytes());
    parts.insert("docProps/app.xml".into(), app_props(n).into_bytes());
    parts.insert("ppt/presentation.xml".into(), presentation(n, size).into_bytes());
    parts.insert("ppt/_rels/presentation.xml.rels".into(), presentation_rels(n).into_bytes());
    parts.insert("ppt/slideMasters/slideMaster1.xml".into(), MASTER.replace("{NS}", NS).replace("{G}", GROUP_HEADER).into_bytes());
    parts.insert(
        "ppt/slideMasters/_rels/slideMaster1.xml.rels".into(),
        rels(&[
            ("rId1", "slideLayout", "../slideLayouts/slideLayout1.xml"),
            ("rId2", "theme", "../theme/theme1.xml"),
        ])
        .into_bytes(),
    );
    parts.insert("ppt/slideLayouts/slideLayout1.xml".into(), LAYOUT.replace("{NS}", NS).replace("{G}", GROUP_HEADER).into_bytes());
    parts.insert(
        "ppt/slideLayouts/_rels/slideLayout1.xml.rels".into(),
        rels(&[("rId1", "slideMaster", "../slideMasters/slideMaster1.xml")]).into_bytes(),
    );
    parts.insert("ppt/theme/theme1.xml".into(), THEME.as_bytes().to_vec());
    parts.extend(media.parts);

    let opts = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(zip_time)
        .unix_permissions(0o644);
    let mut zip = ZipWriter::new(out);
    for (name, bytes) in &parts {
        zip.start_file(name.as_str(), opts).map_err(|e| ExportError::Archive(e.to_string()))?;
        zip.write_all(bytes).map_err(|e| ExportError::Archive(e.to_string()))?;
    }
    zip.finish().map_err(|e| ExportError::Archive(e.to_string()))
}

fn external_target(ctx: &ExportContext, asset: &ImageAsset) -> Result<String, ExportError> {
    if asset.locator.contains("://") {
        return Ok(asset.locator.clone());
    }
    ctx.media_path(asset)
        .map(|p| file_uri(&p))
        .ok_or_else(|| ExportError::UnresolvableMedia(asset.asset_id.clone()))
}

/// Writes `deck` to `path` as a .pptx file.
pub fn export_pptx(deck: &Deck, ctx: &ExportContext, path: &Path, options: &ExportOptions) -> Result<(), ExportError> {
    let buf = write_pptx(deck, ctx, options, std::io::Cursor::new(Vec::new()))?;
    super::write_file(path, &buf.into_inner())
}

fn rels(entries: &[(&str, &str, &str)]) -> String {
    let mut s = format!("{XML_DECL}<Relationships xmlns=\"{REL_NS}\">");
    for (id, ty, target) in entries {
        let _ = write!(s, r#"<Relationship Id="{id}" Type="{OFFICE_REL}/{ty}" Target="{target}"/>"#);
    }
    s.push_str("</Relationships>");
    s
}

fn root_rels() -> String {
    format!(
        r#"{XML_DECL}<Relationships xmlns="{REL_NS}"><Relationship Id="rId1" Type="{OFFICE_REL}/officeDocument" Target="ppt/presentation.xml"/><Relationship Id="rId2" Type="http://schemas.openxmlformats.org/package/2006/relationships/metadata/core-properties" Target="docProps/core.xml"/><Relationship Id="rId3" Type="{OFFICE_REL}/extended-properties" Target="docProps/app.xml"/></Relationships>"#
    )
}

fn content_types(n: usize, media: &Media) -> String {
    let mut s = format!(
        r#"{XML_DECL}<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types"><Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/><Default Extension="xml" ContentType="application/xml"/>"#
    );
    for ext in media.extensions.keys() {
        let _ = write!(s, r#"<Default Extension="{ext}" ContentType="{}"/>"#, mime_type(ext));
    }
    let overrides = [
        ("/docProps/app.xml", "application/vnd.openxmlformats-officedocument.extended-properties+xml"),
        ("/docProps/core.xml", "application/vnd.openxmlformats-package.core-properties+xml"),
        ("/ppt/presentation.xml", "application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"),
        ("/ppt/slideLayouts/slideLayout1.xml", "application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml"),
        ("/ppt/slideMasters/slideMaster1.xml", "application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml"),
        ("/ppt/theme/theme1.xml", "application/vnd.openxmlformats-officedocument.theme+xml"),
    ];
    for (part, ty) in overrides {
        let _ = write!(s, r#"<Override PartName="{part}" ContentType="{ty}"/>"#);
    }
    for k in 1..=n {
        let _ = write!(
            s,
            r#"<Override PartName="/ppt/slides/slide{k}.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.slide+xml"/>"#
        );
    }
    s.push_str("</Types>");
    s
}

fn core_props(deck: &Deck, created: &str) -> String {
    format!(
        r#"{XML_DECL}<cp:coreProperties xmlns:cp="http://schemas.openxmlformats.org/package/2006/metadata/core-properties" xmlns:dc="http://purl.org/dc/elements/1.1/" xmlns:dcterms="http://purl.org/dc/terms/" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance"><dc:title>{}</dc:title><dc:creator>deckforge</dc:creator><dcterms:created xsi:type="dcterms:W3CDTF">{created}</dcterms:created><dcterms:modified xsi:type="dcterms:W3CDTF">{created}</dcterms:modified></cp:coreProperties>"#,
        xml_escape(deck.topic.as_str())
    )
}

fn app_props(n: usize) -> String {
    format!(
        r#"{XML_DECL}<Properties xmlns="http://schemas.openxmlformats.org/officeDocument/2006/extended-properties"><Application>deckforge</Application><Slides>{n}</Slides></Properties>"#
    )
}

fn presentation(n: usize, size: (i64, i64)) -> String {
    let ids: String = (0..n).map(|k| format!(r#"<p:sldId id="{}" r:id="rId{}"/>"#, 256 + k, k + 2)).collect();
    format!(
        r#"{XML_DECL}<p:presentation {NS} saveSubsetFonts="1"><p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="rId1"/></p:sldMasterIdLst><p:sldIdLst>{ids}</p:sldIdLst><p:sldSz cx="{}" cy="{}"/><p:notesSz cx="6858000" cy="9144000"/></p:presentation>"#,
        size.0, size.1
    )
}

fn presentation_rels(n: usize) -> String {
    let mut s = format!("{XML_DECL}<Relationships xmlns=\"{REL_NS}\">");
    let _ = write!(s, r#"<Relationship Id="rId1" Type="{OFFICE_REL}/slideMaster" Target="slideMasters/slideMaster1.xml"/>"#);
    for k in 1..=n {
        let _ = write!(s, r#"<Relationship Id="rId{}" Type="{OFFICE_REL}/slide" Target="slides/slide{k}.xml"/>"#, k + 1);
    }
    let _ = write!(s, r#"<Relationship Id="rId{}" Type="{OFFICE_REL}/theme" Target="theme/theme1.xml"/>"#, n + 2);
    s.push_str("</Relationships>");
    s
}

const MASTER: &str = r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<p:sldMaster {NS}><p:cSld><p:bg><p:bgRef idx="1001"><a:schemeClr val="bg1"/></p:bgRef></p:bg><p:spTree>{G}</p:spTree></p:cSld><p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" accent3="accent3" accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" folHlink="folHlink"/><p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="rId1"/></p:sldLayoutIdLst><p:txStyles><p:titleStyle/><p:bodyStyle/><p:otherStyle/></p:txStyles></p:sldMaster>"#;

const LAYOUT: &str = r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<p:sldLayout {NS} type="blank" preserve="1"><p:cSld name="Blank"><p:spTree>{G}</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>"#;

const THEME: &str = r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<a:theme xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" name="Plain"><a:themeElements><a:clrScheme name="Plain"><a:dk1><a:srgbClr val="000000"/></a:dk1><a:lt1><a:srgbClr val="FFFFFF"/></a:lt1><a:dk2><a:srgbClr val="44546A"/></a:dk2><a:lt2><a:srgbClr val="E7E6E6"/></a:lt2><a:accent1><a:srgbClr val="4472C4"/></a:accent1><a:accent2><a:srgbClr val="ED7D31"/></a:accent2><a:accent3><a:srgbClr val="A5A5A5"/></a:accent3><a:accent4><a:srgbClr val="FFC000"/></a:accent4><a:accent5><a:srgbClr val="5B9BD5"/></a:accent5><a:accent6><a:srgbClr val="70AD47"/></a:accent6><a:hlink><a:srgbClr val="0563C1"/></a:hlink><a:folHlink><a:srgbClr val="954F72"/></a:folHlink></a:clrScheme><a:fontScheme name="Plain"><a:majorFont><a:latin typeface="Calibri Light"/><a:ea typeface=""/><a:cs typeface=""/></a:majorFont><a:minorFont><a:latin typeface="Calibri"/><a:ea typeface=""/><a:cs typeface=""/></a:minorFont></a:fontScheme><a:fmtScheme name="Plain"><a:fillStyleLst><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:fillStyleLst><a:lnStyleLst><a:ln w="6350"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln><a:ln w="12700"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln><a:ln w="19050"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln></a:lnStyleLst><a:effectStyleLst><a:effectStyle><a:effectLst/></a:effectStyle><a:effectStyle><a:effectLst/></a:effectStyle><a:effectStyle><a:effectLst/></a:effectStyle></a:effectStyleLst><a:bgFillStyleLst><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:bgFillStyleLst></a:fmtScheme></a:themeElements></a:theme>"#;
