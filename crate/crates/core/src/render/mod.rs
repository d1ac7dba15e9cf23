//! SVG and HTML artifacts: network maps, overlays and year charts.

mod layout;

pub use layout::{component_boxes, layout, BoundingBox, Positions};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterPartition;
use crate::cocitation::CoCitationNetwork;
use crate::dataset::YearDistribution;
use crate::error::{Error, Result};
use crate::export::xml_escape;
use crate::overlay::OverlayProjection;

const UNCOVERED: &str = "#d9d9d9";
const PLAIN_NODE: &str = "#4d4d4d";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlayMode {
    /// Pick small multiples for three or more datasets, blending otherwise.
    Auto,
    Blend,
    SmallMultiples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    pub seed: u64,
    pub iterations: usize,
    /// Colors interpolated over the edge year range, oldest first.
    pub year_palette: Vec<String>,
    pub dataset_palette: Vec<String>,
    pub node_radius: (f64, f64),
    /// Clusters `#0..#k-1` get a label at their centroid.
    pub label_top_k: usize,
    pub width: f64,
    pub height: f64,
    pub overlay_mode: OverlayMode,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            seed: 42,
            iterations: 150,
            year_palette: ["#2c7bb6", "#abd9e9", "#fdae61", "#d7191c"].map(String::from).to_vec(),
            dataset_palette: ["#1f77b4", "#ff7f0e", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf"]
                .map(String::from)
                .to_vec(),
            node_radius: (2.0, 9.0),
            label_top_k: 10,
            width: 960.0,
            height: 720.0,
            overlay_mode: OverlayMode::Auto,
        }
    }
}

pub fn parse_hex(color: &str) -> Option<(u8, u8, u8)> {
    let h = color.strip_prefix('#')?;
    if h.len() != 6 || !h.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let v = |r: std::ops::Range<usize>| u8::from_str_radix(&h[r], 16).ok();
    Some((v(0..2)?, v(2..4)?, v(4..6)?))
}

fn hex((r, g, b): (u8, u8, u8)) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        for (what, pal) in [("year", &self.year_palette), ("dataset", &self.dataset_palette)] {
            if pal.len() < 2 {
                return Err(Error::invalid(format!("{what} palette needs at least 2 colors")));
            }
            if let Some(bad) = pal.iter().find(|c| parse_hex(c).is_none()) {
                return Err(Error::invalid(format!("{what} palette color `{bad}` is not #rrggbb")));
            }
        }
        let (lo, hi) = self.node_radius;
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::invalid("node radius range must satisfy 0 < min <= max"));
        }
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::invalid("canvas size must be positive"));
        }
        Ok(())
    }

    fn dataset_color(&self, d: usize) -> &str {
        &self.dataset_palette[d % self.dataset_palette.len()]
    }
}

/// Piecewise-linear color scale over `[min, max]`; the palette ends map
/// exactly to the range ends.
#[derive(Clone, Debug)]
pub struct YearScale {
    min: i32,
    max: i32,
    stops: Vec<(u8, u8, u8)>,
}

impl YearScale {
    pub fn new(palette: &[String], min: i32, max: i32) -> Result<YearScale> {
        let stops = palette
            .iter()
            .map(|c| parse_hex(c).ok_or_else(|| Error::invalid(format!("bad color `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        if stops.len() < 2 {
            return Err(Error::invalid("year palette needs at least 2 colors"));
        }
        Ok(YearScale { min, max: max.max(min), stops })
    }

    pub fn color(&self, year: i32) -> String {
        let t = if self.max == self.min {
            0.0
        } else {
            (year.clamp(self.min, self.max) - self.min) as f64 / (self.max - self.min) as f64
        };
        let segs = (self.stops.len() - 1) as f64;
        let pos = t * segs;
        let i = (pos.floor() as usize).min(self.stops.len() - 2);
        let f = pos - i as f64;
        let (a, b) = (self.stops[i], self.stops[i + 1]);
        let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * f).round() as u8;
        hex((mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2)))
    }
}

fn blend(colors: &[&str]) -> String {
    let rgb: Vec<(u8, u8, u8)> = colors.iter().filter_map(|c| parse_hex(c)).collect();
    if rgb.is_empty() {
        return UNCOVERED.to_owned();
    }
    let avg = |f: fn(&(u8, u8, u8)) -> u8| (rgb.iter().map(|c| f(c) as f64).sum::<f64>() / rgb.len() as f64).round() as u8;
    hex((avg(|c| c.0), avg(|c| c.1), avg(|c| c.2)))
}

/// `<subject>.<kind>.svg`
pub fn artifact_name(subject: &str, kind: &str) -> String {
    format!("{subject}.{kind}.svg")
}

struct Canvas {
    scale: f64,
    offset: (f64, f64),
    margin: f64,
}

impl Canvas {
    fn fit(positions: &Positions, width: f64, height: f64, margin: f64) -> Canvas {
        let bb = BoundingBox::of(positions.values()).unwrap_or(BoundingBox { min_x: 0.0, min_y: 0.0, max_x: 0.0, max_y: 0.0 });
        let sx = (width - 2.0 * margin) / bb.width().max(1e-9);
        let sy = (height - 2.0 * margin) / bb.height().max(1e-9);
        let scale = sx.min(sy).min(80.0);
        // center the drawing
        let offset = (
            margin + ((width - 2.0 * margin) - bb.width() * scale) / 2.0 - bb.min_x * scale,
            margin + ((height - 2.0 * margin) - bb.height() * scale) / 2.0 - bb.min_y * scale,
        );
        Canvas { scale, offset, margin }
    }

    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        (p.0 * self.scale + self.offset.0, p.1 * self.scale + self.offset.1)
    }
}

fn svg_open(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(out, "<title>{}</title>", xml_escape(title));
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");
}

/// Draws one panel of the map at the given translation.
#[allow(clippy::too_many_arguments)]
fn draw_panel(
    out: &mut String,
    network: &CoCitationNetwork,
    partition: Option<&ClusterPartition>,
    positions: &Positions,
    canvas: &Canvas,
    scale: Option<&YearScale>,
    node_fill: &dyn Fn(&str) -> String,
    spec: &RenderSpec,
    heading: Option<&str>,
) {
    if let Some(h) = heading {
        let _ = writeln!(out, "<text class=\"panel-title\" x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\">{}</text>", canvas.margin, canvas.margin * 0.6, xml_escape(h));
    }
    out.push_str("<g class=\"edges\" fill=\"none\" stroke-opacity=\"0.6\">\n");
    for ((a, b), e) in &network.edges {
        let (p, q) = (canvas.map(positions[a]), canvas.map(positions[b]));
        let color = scale.map_or_else(|| "#999999".to_owned(), |s| s.color(e.first_cocited_year));
        let _ = writeln!(
            out,
            "<path class=\"edge\" d=\"M{:.2} {:.2} L{:.2} {:.2}\" stroke=\"{color}\" stroke-width=\"{:.2}\" data-year=\"{}\"/>",
            p.0,
            p.1,
            q.0,
            q.1,
            (0.5 + (e.weight as f64).ln_1p() * 0.5).min(4.0),
            e.first_cocited_year
        );
    }
    out.push_str("</g>\n<g class=\"nodes\" stroke=\"#ffffff\" stroke-width=\"0.5\">\n");
    let max_count = network.nodes.values().map(|n| n.count).max().unwrap_or(1).max(1) as f64;
    let (rmin, rmax) = spec.node_radius;
    for (id, n) in &network.nodes {
        let p = canvas.map(positions[id]);
        let r = rmin + (rmax - rmin) * (n.count as f64 / max_count).sqrt();
        let year = n.year.map_or_else(|| "n.d.".to_owned(), |y| y.to_string());
        let cluster = partition
            .and_then(|pt| pt.assignment.get(id))
            .map_or_else(String::new, |c| format!(" cluster #{c}"));
        let _ = writeln!(
            out,
            "<circle class=\"node\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r:.2}\" fill=\"{}\"><title>{} ({year}) cited {}{}</title></circle>",
            p.0,
            p.1,
            node_fill(id),
            xml_escape(id),
            n.count,
            cluster
        );
    }
    out.push_str("</g>\n");
    if let Some(pt) = partition {
        out.push_str("<g class=\"cluster-labels\" font-size=\"13\" font-weight=\"bold\" fill=\"#222222\">\n");
        for c in pt.clusters.iter().take(spec.label_top_k) {
            let pts: Vec<(f64, f64)> = c.members.iter().filter_map(|m| positions.get(m)).map(|&p| canvas.map(p)).collect();
            if pts.is_empty() {
                continue;
            }
            let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
            let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
            let _ = writeln!(
                out,
                "<text class=\"cluster-label\" x=\"{cx:.2}\" y=\"{cy:.2}\" text-anchor=\"middle\">#{} {}</text>",
                c.index,
                xml_escape(&c.label)
            );
        }
        out.push_str("</g>\n");
    }
}

fn draw_year_legend(out: &mut String, scale: &YearScale, x: f64, y: f64) {
    out.push_str("<g class=\"year-legend\" font-size=\"11\">\n");
    let steps = 20;
    for s in 0..steps {
        let year = scale.min as f64 + (scale.max - scale.min) as f64 * s as f64 / (steps - 1) as f64;
        let _ = writeln!(out, "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"6\" height=\"10\" fill=\"{}\"/>", x + 6.0 * s as f64, scale.color(year.round() as i32));
    }
    let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{:.2}\">{}</text>", y + 22.0, scale.min);
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", x + 6.0 * steps as f64, y + 22.0, scale.max);
    out.push_str("</g>\n");
}

/// Network map as SVG. With a projection, nodes take dataset colors:
/// blended for one or two datasets, one panel per dataset (sharing the
/// layout) for three or more unless the spec forces a mode.
pub fn render_map(
    network: &CoCitationNetwork,
    partition: Option<&ClusterPartition>,
    projection: Option<&OverlayProjection>,
    spec: &RenderSpec,
    title: &str,
) -> Result<String> {
    spec.validate()?;
    if network.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let positions = layout(network, spec.seed, spec.iterations);
    let scale = match network.edge_year_range() {
        Some((lo, hi)) => Some(YearScale::new(&spec.year_palette, lo, hi)?),
        None => None,
    };
    let mut out = String::new();

    let panels = projection.map_or(0, |p| p.dataset_names.len());
    let small_multiples = match spec.overlay_mode {
        OverlayMode::Auto => panels >= 3,
        OverlayMode::SmallMultiples => panels >= 1,
        OverlayMode::Blend => false,
    };

    if let (Some(proj), true) = (projection, small_multiples) {
        let cols = (panels as f64).sqrt().ceil() as usize;
        let rows = panels.div_ceil(cols);
        let (pw, ph) = (spec.width, spec.height);
        svg_open(&mut out, pw * cols as f64, ph * rows as f64 + 40.0, title);
        let canvas = Canvas::fit(&positions, pw, ph, 40.0);
        for (d, name) in proj.dataset_names.iter().enumerate() {
            let (tx, ty) = ((d % cols) as f64 * pw, (d / cols) as f64 * ph);
            let _ = writeln!(out, "<g class=\"panel\" data-dataset=\"{}\" transform=\"translate({tx:.2},{ty:.2})\">", xml_escape(name));
            let color = spec.dataset_color(d).to_owned();
            let fill = |id: &str| {
                if proj.membership.get(id).is_some_and(|m| m.0[d]) {
                    color.clone()
                } else {
                    UNCOVERED.to_owned()
                }
            };
            draw_panel(&mut out, network, partition, &positions, &canvas, scale.as_ref(), &fill, spec, Some(name));
            out.push_str("</g>\n");
        }
        if let Some(s) = &scale {
            draw_year_legend(&mut out, s, 10.0, ph * rows as f64 + 5.0);
        }
    } else {
        svg_open(&mut out, spec.width, spec.height + 40.0, title);
        let canvas = Canvas::fit(&positions, spec.width, spec.height, 40.0);
        let fill = |id: &str| -> String {
            match projection {
                Some(proj) => {
                    let colors: Vec<&str> = proj
                        .membership
                        .get(id)
                        .map(|m| m.0.iter().enumerate().filter(|(_, b)| **b).map(|(d, _)| spec.dataset_color(d)).collect())
                        .unwrap_or_default();
                    if colors.is_empty() {
                        UNCOVERED.to_owned()
                    } else {
                        blend(&colors)
                    }
                }
                None => PLAIN_NODE.to_owned(),
            }
        };
        draw_panel(&mut out, network, partition, &positions, &canvas, scale.as_ref(), &fill, spec, None);
        if let Some(proj) = projection {
            out.push_str("<g class=\"legend\" font-size=\"12\">\n");
            for (d, name) in proj.dataset_names.iter().enumerate() {
                let y = 20.0 + 16.0 * d as f64;
                let _ = writeln!(
                    out,
                    "<g class=\"legend-entry\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{:.2}\" y=\"{:.2}\">{}</text></g>",
                    spec.width - 150.0,
                    y - 9.0,
                    spec.dataset_color(d),
                    spec.width - 135.0,
                    y,
                    xml_escape(name)
                );
            }
            out.push_str("</g>\n");
        }
        if let Some(s) = &scale {
            draw_year_legend(&mut out, s, 10.0, spec.height + 5.0);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Wraps an SVG document into a self-contained HTML page; the SVG's
/// `<title>` children serve as hover tooltips.
pub fn to_html(svg: &str, title: &str) -> String {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html xmlns=\"http://www.w3.org/1999/xhtml\">\n<head>\n<meta charset=\"utf-8\"/>\n");
    let _ = writeln!(out, "<title>{}</title>", xml_escape(title));
    out.push_str("<style>body{margin:0;font-family:sans-serif}circle.node:hover{stroke:#000000;stroke-width:1.5}</style>\n</head>\n<body>\n");
    out.push_str(svg);
    out.push_str("</body>\n</html>\n");
    out
}

/// Multi-series line chart of yearly counts (or `ln(1 + count)`).
pub fn render_distribution(distributions: &[YearDistribution], log: bool, spec: &RenderSpec) -> Result<String> {
    spec.validate()?;
    if distributions.is_empty() {
        return Err(Error::invalid("at least one distribution is required"));
    }
    let (w, h) = (spec.width, spec.height * 0.6);
    let (left, right, top, bottom) = (60.0, 160.0, 30.0, 50.0);
    let years: Vec<i32> = distributions.iter().filter_map(|d| d.range).flat_map(|(a, b)| [a, b]).collect();
    let (y0, y1) = (years.iter().copied().min().unwrap_or(0), years.iter().copied().max().unwrap_or(0));
    let value = |c: usize| if log { (c as f64).ln_1p() } else { c as f64 };
    let vmax = distributions
        .iter()
        .flat_map(|d| d.counts.values().map(|&c| value(c)))
        .fold(0.0, f64::max)
        .max(1e-9);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let x_of = |y: i32| if y1 == y0 { left + plot_w / 2.0 } else { left + plot_w * (y - y0) as f64 / (y1 - y0) as f64 };
    let y_of = |v: f64| top + plot_h * (1.0 - v / vmax);

    let mut out = String::new();
    svg_open(&mut out, w, h, if log { "Articles per year (ln(1 + count))" } else { "Articles per year" });
    out.push_str("<g class=\"axes\" stroke=\"#333333\" font-size=\"12\">\n");
    let _ = writeln!(out, "<line x1=\"{left:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>", top + plot_h, left + plot_w, top + plot_h);
    let _ = writeln!(out, "<line x1=\"{left:.2}\" y1=\"{top:.2}\" x2=\"{left:.2}\" y2=\"{:.2}\"/>", top + plot_h);
    let _ = writeln!(out, "<text class=\"axis-label\" x=\"{left:.2}\" y=\"{:.2}\" stroke=\"none\">{y0}</text>", h - 20.0);
    let _ = writeln!(out, "<text class=\"axis-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" stroke=\"none\">{y1}</text>", left + plot_w, h - 20.0);
    let _ = writeln!(
        out,
        "<text class=\"axis-label\" x=\"10\" y=\"{:.2}\" stroke=\"none\">{}</text>",
        top - 10.0,
        if log { "ln(1 + articles)" } else { "articles" }
    );
    out.push_str("</g>\n");
    for (s, d) in distributions.iter().enumerate() {
        let color = spec.dataset_color(s);
        let pts: Vec<String> = d
            .dense()
            .into_iter()
            .map(|(y, c)| format!("{:.2},{:.2}", x_of(y), y_of(value(c))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline class=\"series\" data-dataset=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            xml_escape(&d.dataset_name),
            pts.join(" ")
        );
        if pts.len() == 1 {
            let (x, y) = pts[0].split_once(',').expect("formatted pair");
            let _ = writeln!(out, "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"{color}\"/>");
        }
    }
    out.push_str("<g class=\"legend\" font-size=\"12\">\n");
    for (s, d) in distributions.iter().enumerate() {
        let y = top + 16.0 * s as f64;
        let _ = writeln!(
            out,
            "<g class=\"legend-entry\"><rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{:.2}\" y=\"{:.2}\">{} ({})</text></g>",
            w - right + 15.0,
            y - 9.0,
            spec.dataset_color(s),
            w - right + 30.0,
            y,
            xml_escape(&d.dataset_name),
            d.total()
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Counts elements by local name; used to sanity-check emitted documents.
pub fn count_elements(xml: &str) -> Result<BTreeMap<String, usize>> {
    use quick_xml::events::Event;
    let mut reader = quick_xml::Reader::from_str(xml);
    let mut counts = BTreeMap::new();
    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) | Ok(Event::Empty(e)) => {
                *counts.entry(String::from_utf8_lossy(e.local_name().as_ref()).into_owned()).or_insert(0) += 1;
            }
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(e) => return Err(Error::Xml(e.to_string())),
        }
    }
    Ok(counts)
}
