//! Single-file HTML preview: one section per slide, absolutely positioned
//! boxes, inline SVG charts and inlined images where the bytes are at hand.

use std::fmt::Write as _;
use std::path::Path;

use base64::Engine as _;

use super::{media_extension, mime_type, xml_escape, ExportContext, ExportError, DEFAULT_MAX_MEDIA_BYTES};
use crate::chart::{ChartKind, ChartSpec};
use crate::model::{Deck, FilledContent, PlaceholderKind};

const PALETTE: &[&str] = &["#4472c4", "#ed7d31", "#a5a5a5", "#ffc000", "#5b9bd5", "#70ad47", "#264478", "#9e480e"];
const PIE_R: f64 = 100.0;
const PIE_C: f64 = 110.0;

/// SVG path data for each wedge of a pie, clockwise from 12 o'clock.
/// A wedge covering the whole disc comes back as an empty string; callers
/// draw a circle instead.
pub fn pie_wedge_paths(values: &[f64]) -> Vec<String> {
    let clean: Vec<f64> = values.iter().map(|v| if v.is_finite() && *v > 0.0 { *v } else { 0.0 }).collect();
    let total: f64 = clean.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let point = |frac: f64| {
        let a = frac * std::f64::consts::TAU;
        (PIE_C + PIE_R * a.sin(), PIE_C - PIE_R * a.cos())
    };
    let mut cum = 0.0;
    clean
        .iter()
        .map(|v| {
            let start = cum / total;
            cum += v;
            let end = cum / total;
            if end - start >= 1.0 - 1e-12 {
                return String::new();
            }
            let (x0, y0) = point(start);
            let (x1, y1) = point(end);
            let large = u8::from(end - start > 0.5);
            format!("M {PIE_C:.6} {PIE_C:.6} L {x0:.6} {y0:.6} A {PIE_R:.6} {PIE_R:.6} 0 {large} 1 {x1:.6} {y1:.6} Z")
        })
        .collect()
}

fn chart_svg(chart: &ChartSpec) -> String {
    let mut s = String::new();
    match chart.kind {
        ChartKind::Pie => {
            let cats = chart.categories();
            let values: Vec<f64> = cats.iter().map(|(_, v)| *v).collect();
            let _ = write!(s, r#"<svg viewBox="0 0 420 220" class="chart pie">"#);
            for (i, d) in pie_wedge_paths(&values).iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                if d.is_empty() {
                    let _ = write!(s, r#"<circle cx="{PIE_C}" cy="{PIE_C}" r="{PIE_R}" fill="{color}"/>"#);
                } else {
                    let _ = write!(s, r#"<path d="{d}" fill="{color}"/>"#);
                }
            }
            for (i, (label, v)) in cats.iter().enumerate() {
                let y = 30 + i * 28;
                let _ = write!(
                    s,
                    r#"<rect x="240" y="{}" width="14" height="14" fill="{}"/><text x="262" y="{}">{} ({v:.0}%)</text>"#,
                    y - 12,
                    PALETTE[i % PALETTE.len()],
                    y,
                    xml_escape(label)
                );
            }
        }
        ChartKind::Histogram => {
            let cats = chart.categories();
            let max = cats.iter().map(|(_, v)| *v).fold(0.0, f64::max);
            let slot = 400.0 / cats.len().max(1) as f64;
            let _ = write!(s, r#"<svg viewBox="0 0 420 240" class="chart histogram">"#);
            for (i, (label, v)) in cats.iter().enumerate() {
                let h = if max > 0.0 { v / max * 190.0 } else { 0.0 };
                let x = 10.0 + i as f64 * slot;
                let _ = write!(
                    s,
                    r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{h:.6}" fill="{}"/><text x="{:.6}" y="225" text-anchor="middle">{}</text>"#,
                    x + slot * 0.2,
                    200.0 - h,
                    slot * 0.6,
                    PALETTE[i % PALETTE.len()],
                    x + slot / 2.0,
                    xml_escape(label)
                );
            }
        }
        ChartKind::Scatter => {
            let pts = chart.points();
            let (xmin, xmax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), (x, _)| (a.min(*x), b.max(*x)));
            let (ymin, ymax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), (_, y)| (a.min(*y), b.max(*y)));
            let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
            let _ = write!(
                s,
                r##"<svg viewBox="0 0 420 240" class="chart scatter"><line x1="30" y1="200" x2="410" y2="200" stroke="#404040"/><line x1="30" y1="10" x2="30" y2="200" stroke="#404040"/>"##
            );
            for (x, y) in pts {
                let cx = 30.0 + (x - xmin) / span(xmin, xmax) * 370.0;
                let cy = 200.0 - (y - ymin) / span(ymin, ymax) * 180.0;
                let _ = write!(s, r#"<circle cx="{cx:.6}" cy="{cy:.6}" r="4" fill="{}"/>"#, PALETTE[0]);
            }
            if let Some((xl, yl)) = &chart.axis_labels {
                let _ = write!(
                    s,
                    r#"<text x="220" y="228" text-anchor="middle">{}</text><text x="12" y="105" transform="rotate(-90 12 105)" text-anchor="middle">{}</text>"#,
                    xml_escape(xl),
                    xml_escape(yl)
                );
            }
        }
    }
    s.push_str("</svg>");
    s
}

fn image_src(ctx: &ExportContext, asset: &crate::model::ImageAsset) -> String {
    match ctx.read_media(asset, DEFAULT_MAX_MEDIA_BYTES) {
        Ok(bytes) => format!(
            "data:{};base64,{}",
            mime_type(media_extension(&asset.locator)),
            base64::engine::general_purpose::STANDARD.encode(bytes)
        ),
        Err(_) => asset.locator.clone(),
    }
}

/// Renders `deck` as a standalone HTML document.
pub fn render_html(deck: &Deck, ctx: &ExportContext) -> Result<String, ExportError> {
    let topic = xml_escape(deck.topic.as_str());
    let mut out = format!(
        r#"<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{topic}</title>
<style>
body {{ margin: 0; background: #222; font-family: sans-serif; }}
section.slide {{ position: relative; width: 960px; height: 540px; margin: 20px auto; background: #fff; overflow: hidden; }}
.box {{ position: absolute; display: flex; align-items: center; justify-content: center; text-align: center; box-sizing: border-box; }}
.title_text {{ font-size: 36px; font-weight: bold; }}
.subtitle_text {{ font-size: 22px; }}
.body_text {{ font-size: 26px; }}
.caption_text {{ font-size: 18px; font-style: italic; }}
.box img {{ max-width: 100%; max-height: 100%; object-fit: contain; }}
.box svg {{ width: 100%; height: 100%; }}
.chart-title {{ font-size: 22px; font-weight: bold; }}
</style>
</head>
<body>
"#
    );
    for (k, slide) in deck.slides.iter().enumerate() {
        let template = ctx.template(k, &slide.template_id)?;
        let _ = writeln!(
            out,
            r#"<section class="slide" id="slide-{}" data-generator="{}" data-seed="{}">"#,
            k + 1,
            xml_escape(&slide.meta.generator),
            xml_escape(&slide.meta.seed)
        );
        for p in &template.placeholders {
            let Some(fill) = slide.fills.get(&p.id) else { continue };
            let f = &p.frame;
            let class = match p.kind {
                PlaceholderKind::TitleText => "title_text",
                PlaceholderKind::SubtitleText => "subtitle_text",
                PlaceholderKind::BodyText => "body_text",
                PlaceholderKind::CaptionText => "caption_text",
                PlaceholderKind::Image => "image",
                PlaceholderKind::Chart => "chart",
            };
            let _ = write!(
                out,
                r#"<div class="box {class}" style="left:{:.4}%;top:{:.4}%;width:{:.4}%;height:{:.4}%">"#,
                f.x * 100.0,
                f.y * 100.0,
                f.width * 100.0,
                f.height * 100.0
            );
            match fill {
                FilledContent::Text { text } => out.push_str(&xml_escape(text).replace('\n', "<br>")),
                FilledContent::Image { asset } => {
                    let _ = write!(out, r#"<img src="{}" alt="{}">"#, image_src(ctx, asset), xml_escape(&asset.asset_id));
                }
                FilledContent::Chart { chart } => {
                    let _ = write!(
                        out,
                        r#"<div style="width:100%;height:100%;display:flex;flex-direction:column"><div class="chart-title">{}</div>{}</div>"#,
                        xml_escape(&chart.title),
                        chart_svg(chart)
                    );
                }
            }
            out.push_str("</div>\n");
        }
        out.push_str("</section>\n");
    }
    out.push_str("</body>\n</html>\n");
    Ok(out)
}

/// Writes `deck` to `path` as HTML.
pub fn export_html(deck: &Deck, ctx: &ExportContext, path: &Path) -> Result<(), ExportError> {
    super::write_file(path, render_html(deck, ctx)?.as_bytes())
}
