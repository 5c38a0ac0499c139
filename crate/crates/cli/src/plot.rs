//! Static SVG figures rendered from the CSV artifacts.
//!
//! Output depends only on the CSV text and the supplied hash, so identical
//! inputs give byte-identical files.

use std::fmt::Write as _;

use crate::error::CliError;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 540.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Spectrum,
    SpacetimeHeat,
    ExponentProfile,
    Ray,
}

impl PlotKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "spectrum" => Ok(PlotKind::Spectrum),
            "spacetime-heat" => Ok(PlotKind::SpacetimeHeat),
            "exponent-profile" => Ok(PlotKind::ExponentProfile),
            "ray" => Ok(PlotKind::Ray),
            other => Err(CliError::Validation(format!(
                "unknown plot kind `{other}` (expected spectrum, spacetime-heat, exponent-profile or ray)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::Spectrum => "spectrum",
            PlotKind::SpacetimeHeat => "spacetime-heat",
            PlotKind::ExponentProfile => "exponent-profile",
            PlotKind::Ray => "ray",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            PlotKind::Spectrum => &["xi", "re", "im"],
            PlotKind::SpacetimeHeat => &["t", "xi", "re", "im"],
            PlotKind::ExponentProfile => &["x0", "s_est", "fit_quality"],
            PlotKind::Ray => &["t", "x_sing"],
        }
    }
}

/// Parses the numeric rows of `csv`, checking the header against `kind`.
pub fn read_table(csv_text: &[u8], kind: PlotKind) -> Result<Vec<Vec<f64>>, CliError> {
    let expected = kind.header().join(",");
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv_text);
    let header = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("unreadable CSV: {e}")))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != expected {
        return Err(CliError::Validation(format!(
            "{} plot expects header `{expected}`, found `{header}`",
            kind.as_str()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Validation(format!("CSV row {}: {e}", i + 1)))?;
        let row = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Validation(format!("CSV row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!(
            "{} plot needs data rows under `{expected}`, the CSV has none",
            kind.as_str()
        )));
    }
    Ok(rows)
}

/// Renders `csv_text` as `kind`, tagging the file with `hash`.
pub fn render(csv_text: &[u8], kind: PlotKind, hash: &str) -> Result<String, CliError> {
    let rows = read_table(csv_text, kind)?;
    let mut svg = Svg::new(kind, hash);
    match kind {
        PlotKind::Spectrum => spectrum(&mut svg, &rows)?,
        PlotKind::SpacetimeHeat => heat(&mut svg, &rows)?,
        PlotKind::ExponentProfile => profile(&mut svg, &rows)?,
        PlotKind::Ray => ray(&mut svg, &rows)?,
    }
    Ok(svg.finish())
}

struct Svg {
    body: String,
}

/// Linear map from a data box to the plot area.
#[derive(Clone, Copy)]
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn widen((a, b): (f64, f64)) -> (f64, f64) {
    if b > a {
        (a, b)
    } else {
        let d = if a == 0.0 { 1.0 } else { 0.5 * a.abs() };
        (a - d, b + d)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.filter(|v| v.is_finite()).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((a, b)) => Some((a.min(v), b.max(v))),
    })
}

impl Svg {
    fn new(kind: PlotKind, hash: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"540\" viewBox=\"0 0 960 540\">"
        );
        let _ = writeln!(body, "<!-- conewave plot kind={} config-sha256={hash} -->", kind.as_str());
        let _ = writeln!(body, "<rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"#ffffff\"/>");
        Self { body }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: u32, s: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"{size}\" text-anchor=\"{anchor}\">{s}</text>"
        );
    }

    fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, dash: bool) {
        let dash = if dash { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"1.5\"{dash}/>",
            a.0, a.1, b.0, b.1
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>",
            coords.join(" ")
        );
    }

    fn circle(&mut self, (x, y): (f64, f64), fill: &str) {
        let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{fill}\"/>");
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>"
        );
    }

    /// Frame, ticks and labels. `log` axes label ticks as powers of ten.
    fn axes(&mut self, f: &Frame, xlabel: &str, ylabel: &str, log: (bool, bool), title: &str) {
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            self.body,
            "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333333\"/>",
            x1 - x0,
            y0 - y1
        );
        for i in 0..=4 {
            let v = snap(f.x.0 + (f.x.1 - f.x.0) * i as f64 / 4.0, f.x);
            let px = f.px(v);
            self.line((px, y0), (px, y0 + 5.0), "#333333", false);
            self.text(px, y0 + 20.0, "middle", 12, &tick_label(v, log.0));
            let v = snap(f.y.0 + (f.y.1 - f.y.0) * i as f64 / 4.0, f.y);
            let py = f.py(v);
            self.line((x0 - 5.0, py), (x0, py), "#333333", false);
            self.text(x0 - 8.0, py + 4.0, "end", 12, &tick_label(v, log.1));
        }
        self.text(0.5 * (x0 + x1), HEIGHT - 15.0, "middle", 14, xlabel);
        let _ = writeln!(
            self.body,
            "<text x=\"20\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">{ylabel}</text>",
            0.5 * (y0 + y1),
            0.5 * (y0 + y1)
        );
        self.text(0.5 * (x0 + x1), 30.0, "middle", 16, title);
    }
}

/// Rounds ticks that are zero up to cancellation.
fn snap(v: f64, (a, b): (f64, f64)) -> f64 {
    if v.abs() <= 1e-9 * (b - a) {
        0.0
    } else {
        v
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{v:.1}")
    } else if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Slope and intercept of the least-squares line.
fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    Some((slope, ym - slope * xm))
}

/// Keeps the extreme points of each pixel column so long series stay small.
fn thin(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut column = f64::NAN;
    let (mut lo, mut hi) = ((0.0, f64::INFINITY), (0.0, f64::NEG_INFINITY));
    let flush = |out: &mut Vec<(f64, f64)>, lo: (f64, f64), hi: (f64, f64)| {
        if lo.1.is_finite() {
            if lo.0 <= hi.0 {
                out.push(lo);
                if hi != lo {
                    out.push(hi);
                }
            } else {
                out.push(hi);
                out.push(lo);
            }
        }
    };
    for &(x, y) in pts {
        let c = x.round();
        if c != column {
            flush(&mut out, lo, hi);
            column = c;
            lo = (x, f64::INFINITY);
            hi = (x, f64::NEG_INFINITY);
        }
        if y < lo.1 {
            lo = (x, y);
        }
        if y > hi.1 {
            hi = (x, y);
        }
    }
    flush(&mut out, lo, hi);
    out
}

fn spectrum(svg: &mut Svg, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            let m = r[1].hypot(r[2]);
            (r[0] > 0.0 && m > 0.0 && m.is_finite()).then(|| (r[0].log10(), m.log10()))
        })
        .collect();
    if pts.is_empty() {
        return Err(CliError::Validation("spectrum CSV has no nonzero samples".into()));
    }
    let f = Frame::new(bounds(pts.iter().map(|p| p.0)).unwrap(), bounds(pts.iter().map(|p| p.1)).unwrap());
    svg.axes(&f, "log10 xi", "log10 |value|", (true, true), "spectrum magnitude");
    let px: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (f.px(x), f.py(y))).collect();
    svg.polyline(&thin(&px), "#1f4e9c");
    // fit over the upper decade-half of the frequency range, away from ξ = 0
    let mid = 0.5 * (f.x.0 + f.x.1);
    let upper: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0 >= mid).collect();
    if let Some((slope, icept)) = fit_line(if upper.len() >= 2 { &upper } else { &pts }) {
        let (a, b) = (mid, f.x.1);
        svg.line((f.px(a), f.py(icept + slope * a)), (f.px(b), f.py(icept + slope * b)), "#c0392b", true);
        svg.text(WIDTH - RIGHT - 10.0, TOP + 20.0, "end", 14, &format!("fitted slope {slope:.4}"));
    }
    Ok(())
}

fn ramp(v: f64) -> String {
    // dark blue → teal → yellow
    let stops = [(0.0, [20.0, 30.0, 90.0]), (0.5, [30.0, 150.0, 140.0]), (1.0, [250.0, 230.0, 60.0])];
    let v = v.clamp(0.0, 1.0);
    let (a, b) = if v <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let u = (v - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] + u * (b.1[i] - a.1[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn heat(svg: &mut Svg, rows: &[Vec<f64>]) -> Result<(), CliError> {
    const COLS: usize = 160;
    const ROWS: usize = 100;
    let tb = bounds(rows.iter().map(|r| r[0])).ok_or_else(|| CliError::Validation("no finite times".into()))?;
    let xb = bounds(rows.iter().map(|r| r[1])).ok_or_else(|| CliError::Validation("no finite frequencies".into()))?;
    let f = Frame::new(tb, xb);
    let mut cells = vec![f64::NEG_INFINITY; COLS * ROWS];
    for r in rows {
        let m = r[2].hypot(r[3]);
        if !(m > 0.0 && m.is_finite()) {
            continue;
        }
        let i = (((r[0] - f.x.0) / (f.x.1 - f.x.0)) * COLS as f64).floor().clamp(0.0, COLS as f64 - 1.0) as usize;
        let j = (((r[1] - f.y.0) / (f.y.1 - f.y.0)) * ROWS as f64).floor().clamp(0.0, ROWS as f64 - 1.0) as usize;
        let c = &mut cells[j * COLS + i];
        *c = c.max(m.log10());
    }
    let (lo, hi) = bounds(cells.iter().copied()).unwrap_or((0.0, 1.0));
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let (cw, ch) = ((WIDTH - LEFT - RIGHT) / COLS as f64, (HEIGHT - TOP - BOTTOM) / ROWS as f64);
    for j in 0..ROWS {
        for i in 0..COLS {
            let v = cells[j * COLS + i];
            if v.is_finite() {
                let y = HEIGHT - BOTTOM - (j + 1) as f64 * ch;
                svg.rect(LEFT + i as f64 * cw, y, cw + 0.05, ch + 0.05, &ramp((v - lo) / (hi - lo)));
            }
        }
    }
    svg.axes(&f, "t", "xi", (false, false), "log10 |u(t, xi)|");
    svg.text(WIDTH - RIGHT, TOP - 8.0, "end", 12, &format!("colour range 1e{lo:.2} to 1e{hi:.2}"));
    Ok(())
}

fn profile(svg: &mut Svg, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let xb = bounds(rows.iter().map(|r| r[0])).ok_or_else(|| CliError::Validation("no finite x0".into()))?;
    let yb = bounds(rows.iter().map(|r| r[1])).unwrap_or((-1.0, 1.0));
    let f = Frame::new(xb, (yb.0 - 0.1 * (yb.1 - yb.0).max(0.1), yb.1 + 0.1 * (yb.1 - yb.0).max(0.1)));
    svg.axes(&f, "x0", "estimated Sobolev exponent", (false, false), "local regularity");
    let mut run = Vec::new();
    for r in rows {
        if r[1].is_finite() {
            run.push((f.px(r[0]), f.py(r[1])));
        } else {
            svg.polyline(&run, "#1f4e9c");
            run.clear();
            let x = f.px(r[0]);
            let _ = writeln!(
                svg.body,
                "<path d=\"M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} Z\" fill=\"#999999\"/>",
                x,
                TOP + 2.0,
                x - 3.0,
                TOP + 8.0,
                x + 3.0,
                TOP + 8.0
            );
        }
    }
    svg.polyline(&run, "#1f4e9c");
    if rows.iter().any(|r| !r[1].is_finite()) {
        svg.text(LEFT + 10.0, TOP + 22.0, "start", 12, "grey marks: numerically smooth");
    }
    Ok(())
}

fn ray(svg: &mut Svg, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r[0].is_finite() && r[1].is_finite()).map(|r| (r[0], r[1])).collect();
    let tb = bounds(pts.iter().map(|p| p.0)).ok_or_else(|| CliError::Validation("no finite ray points".into()))?;
    let pad = 0.1 * (tb.1 - tb.0).max(0.1);
    let tb = (tb.0 - pad, tb.1 + pad);
    let reach = tb.0.abs().max(tb.1.abs());
    let xb = bounds(pts.iter().map(|p| p.1).chain([-reach, reach])).unwrap();
    let f = Frame::new(tb, xb);
    svg.axes(&f, "t", "x", (false, false), "singular ray");
    for s in [1.0, -1.0] {
        svg.line((f.px(tb.0), f.py(s * tb.0)), (f.px(tb.1), f.py(s * tb.1)), "#888888", true);
    }
    if let Some((slope, icept)) = fit_line(&pts) {
        svg.line((f.px(tb.0), f.py(icept + slope * tb.0)), (f.px(tb.1), f.py(icept + slope * tb.1)), "#c0392b", false);
        svg.text(WIDTH - RIGHT - 10.0, TOP + 20.0, "end", 14, &format!("fitted speed {:.4}", -slope));
    }
    for &(t, x) in &pts {
        svg.circle((f.px(t), f.py(x)), "#1f4e9c");
    }
    svg.text(WIDTH - RIGHT - 10.0, TOP + 40.0, "end", 12, "dashed: light cone x = ±t");
    Ok(())
}
