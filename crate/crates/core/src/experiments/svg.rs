//! Minimal SVG line and scatter plots for scans, subspace growth and
//! dimension ratios.

use std::fmt::Write;

use crate::krylov::StepRecord;

use super::scan::ScanResult;
use super::table::Table1Row;

const WIDTH: f64 = 640.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const PANEL_GAP: f64 = 55.0;
const MARGIN_BOTTOM: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Line,
    Dots,
    LineDots,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub mark: Mark,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color: &'static str, mark: Mark) -> Self {
        Self {
            label: label.into(),
            points,
            color,
            mark,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Panel {
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub height: f64,
    pub series: Vec<Series>,
}

impl Panel {
    pub fn new(x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_y: false,
            height: 280.0,
            series: Vec::new(),
        }
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn height(mut self, h: f64) -> Self {
        self.height = h;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn visible(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let log = self.log_y;
        self.series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(move |&(x, y)| x.is_finite() && y.is_finite() && (!log || y > 0.0))
    }
}

#[derive(Clone, Debug)]
pub struct Figure {
    pub title: String,
    pub panels: Vec<Panel>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// About `target` round-valued ticks covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.0e}")
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

impl Figure {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            panels: Vec::new(),
        }
    }

    pub fn with(mut self, p: Panel) -> Self {
        self.panels.push(p);
        self
    }

    pub fn render(&self) -> String {
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let height = MARGIN_TOP
            + self.panels.iter().map(|p| p.height).sum::<f64>()
            + PANEL_GAP * self.panels.len().saturating_sub(1) as f64
            + MARGIN_BOTTOM;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" viewBox="0 0 {WIDTH} {height:.0}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        );
        let mut top = MARGIN_TOP;
        for panel in &self.panels {
            render_panel(&mut svg, panel, top, plot_w);
            top += panel.height + PANEL_GAP;
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn render_panel(svg: &mut String, panel: &Panel, top: f64, plot_w: f64) {
    let h = panel.height;
    let (x0, x1) = {
        let (lo, hi) = panel
            .visible()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| (lo.min(x), hi.max(x)));
        if lo.is_finite() { padded(lo, hi) } else { (0.0, 1.0) }
    };
    let (y0, y1) = {
        let map = |y: f64| if panel.log_y { y.log10() } else { y };
        let (lo, hi) = panel
            .visible()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, y)| {
                (lo.min(map(y)), hi.max(map(y)))
            });
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if panel.log_y {
            (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
        } else {
            padded(lo, hi)
        }
    };
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| {
        let v = if panel.log_y { y.log10() } else { y };
        top + h - (v - y0) / (y1 - y0) * h
    };

    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{top:.1}" width="{plot_w:.1}" height="{h:.1}" fill="none" stroke="black"/>"#
    );
    for t in nice_ticks(x0, x1, 6) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            top + h,
            top + h + 5.0,
            top + h + 18.0,
            tick_label(t)
        );
    }
    let y_ticks: Vec<f64> = if panel.log_y {
        let step = ((y1 - y0) / 6.0).ceil().max(1.0) as i64;
        (y0 as i64..=y1 as i64).step_by(step as usize).map(|e| 10f64.powi(e as i32)).collect()
    } else {
        nice_ticks(y0, y1, 5)
    };
    for t in y_ticks {
        let y = sy(t);
        let label = if panel.log_y { format!("1e{}", t.log10().round()) } else { tick_label(t) };
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_LEFT}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            label
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        top + h + 36.0,
        escape(&panel.x_label)
    );
    let (lx, ly) = (20.0, top + h / 2.0);
    let _ = writeln!(
        svg,
        r#"<text x="{lx}" y="{ly:.1}" text-anchor="middle" transform="rotate(-90 {lx} {ly:.1})">{}</text>"#,
        escape(&panel.y_label)
    );

    for (i, s) in panel.series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(|&(x, y)| x.is_finite() && y.is_finite() && (!panel.log_y || y > 0.0))
            .map(|(x, y)| (sx(x), sy(y)))
            .collect();
        if matches!(s.mark, Mark::Line | Mark::LineDots) && pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                s.color,
                path.join(" ")
            );
        }
        if matches!(s.mark, Mark::Dots | Mark::LineDots) {
            for (x, y) in &pts {
                let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"/>"#, s.color);
            }
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.1}" y="{:.1}" width="12" height="4" fill="{}"/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
            ly - 6.0,
            s.color,
            lx + 18.0,
            escape(&s.label)
        );
    }
}

fn points(scan: &ScanResult, f: impl Fn(&super::scan::ScanPoint) -> Option<f64>) -> Vec<(f64, f64)> {
    scan.points.iter().filter_map(|p| Some((p.l0, f(p)?))).collect()
}

/// Ground-state energy against `l0`, with the exact curve when attached and
/// a logarithmic relative-deviation panel below.
pub fn energy_figure(scan: &ScanResult) -> String {
    let mut top = Panel::new("l0", "E0");
    let exact = points(scan, |p| p.energy_exact);
    if !exact.is_empty() {
        top = top.with(Series::new("exact", exact, "black", Mark::Line));
    }
    top = top.with(Series::new(scan.method.to_string(), points(scan, |p| p.energy), "#d62728", Mark::Dots));
    let mut fig = Figure::new(format!("Ground-state energy, N = {}", scan.n_sites())).with(top);
    let devs = points(scan, |p| p.rel_dev());
    if !devs.is_empty() {
        fig = fig.with(
            Panel::new("l0", "relative deviation")
                .log_y()
                .height(160.0)
                .with(Series::new("|dE|/|E|", devs, "#1f77b4", Mark::LineDots)),
        );
    }
    fig.render()
}

/// `<P>` against `l0`; an exact scan on the same model may be overlaid.
pub fn particle_number_figure(scan: &ScanResult, exact: Option<&ScanResult>) -> String {
    let mut panel = Panel::new("l0", "<P>");
    if let Some(e) = exact {
        panel = panel.with(Series::new("exact", points(e, |p| p.particle_number), "black", Mark::Line));
    }
    panel = panel.with(Series::new(
        scan.method.to_string(),
        points(scan, |p| p.particle_number),
        "#d62728",
        Mark::Dots,
    ));
    Figure::new(format!("Particle number, N = {}", scan.n_sites())).with(panel).render()
}

/// Subspace dimension against Trotter step, with the sector size for scale.
pub fn dimension_figure(n_sites: usize, steps: &[StepRecord], dim_sector: u64) -> String {
    let growth: Vec<(f64, f64)> = steps.iter().map(|s| (s.k as f64, s.dim as f64)).collect();
    let sector: Vec<(f64, f64)> = match (steps.first(), steps.last()) {
        (Some(a), Some(b)) => vec![(a.k as f64, dim_sector as f64), (b.k as f64, dim_sector as f64)],
        _ => Vec::new(),
    };
    let panel = Panel::new("Trotter step k", "dimension")
        .with(Series::new("dim K", growth, "#1f77b4", Mark::LineDots))
        .with(Series::new("dim H", sector, "black", Mark::Line));
    Figure::new(format!("Subspace growth, N = {n_sites}")).with(panel).render()
}

/// `dimK/dimH` against system size.
pub fn dim_ratio_figure(rows: &[Table1Row]) -> String {
    let pts = rows.iter().map(|r| (r.n_sites as f64, r.dim_ratio)).collect();
    let panel = Panel::new("N", "dim K / dim H").with(Series::new("ratio", pts, "#2ca02c", Mark::LineDots));
    Figure::new("Subspace fraction").with(panel).render()
}
