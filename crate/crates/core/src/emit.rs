//! SVG renderings of partial dependence diagnostics.
//!
//! Every renderer returns a [`Plot`]: an SVG 1.1 document plus a CSV sidecar
//! holding exactly the numbers that were drawn. Numbers in the sidecar are
//! written in shortest round-trip form, so they equal the engine outputs
//! bit for bit.
//!
//! Colors use a diverging blue → white → red map: blue for low or negative
//! values, red for high or positive ones.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pdp::{PdKind, PdResult};
use crate::tabular::format_f64;

pub const BLUE: Rgb = Rgb(0x21, 0x66, 0xAC);
pub const WHITE: Rgb = Rgb(0xFF, 0xFF, 0xFF);
pub const RED: Rgb = Rgb(0xB2, 0x18, 0x2B);
const GREY: &str = "#555555";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    PdpOverlay,
    MatchPlot,
    Pd2dScatter,
    ResidualScatter,
    Matrix,
}

impl PlotKind {
    pub fn file_stem(&self) -> &'static str {
        match self {
            PlotKind::PdpOverlay => "pdp_overlay",
            PlotKind::MatchPlot => "match_plot",
            PlotKind::Pd2dScatter => "pd2d_scatter",
            PlotKind::ResidualScatter => "residual_scatter",
            PlotKind::Matrix => "matrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub width: u32,
    pub height: u32,
    pub point_radius: f64,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
}

impl PlotSpec {
    pub fn new(kind: PlotKind) -> Self {
        let (width, height) = match kind {
            PlotKind::Matrix => (800, 800),
            PlotKind::MatchPlot => (480, 480),
            _ => (640, 480),
        };
        PlotSpec {
            kind,
            width,
            height,
            point_radius: 2.5,
            x_label: None,
            y_label: None,
        }
    }

    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Emit("plot width and height must be positive".into()));
        }
        if self.point_radius.is_nan() || self.point_radius <= 0.0 {
            return Err(Error::Emit("point radius must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub fn hex(&self) -> String {
        format!("#{:02X}{:02X}{:02X}", self.0, self.1, self.2)
    }

    /// Moves from `self` towards `to` by `t ∈ [0, 1]`. Any `t > 0` changes
    /// every channel that differs, so nonzero values never render as the
    /// start color.
    fn towards(self, to: Rgb, t: f64) -> Rgb {
        let t = t.clamp(0.0, 1.0);
        let mix = |a: u8, b: u8| {
            let delta = (b as f64 - a as f64) * t;
            let step = if delta > 0.0 {
                delta.ceil()
            } else {
                delta.floor()
            };
            (a as f64 + step).clamp(0.0, 255.0) as u8
        };
        Rgb(mix(self.0, to.0), mix(self.1, to.1), mix(self.2, to.2))
    }
}

/// Maps `t ∈ [-1, 1]` to blue (−1), white (0) and red (+1).
pub fn diverging(t: f64) -> Rgb {
    if t < 0.0 {
        WHITE.towards(BLUE, -t)
    } else if t > 0.0 {
        WHITE.towards(RED, t)
    } else {
        WHITE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pd2dMode {
    /// Color by the PD value.
    Pd,
    /// Color by `PD(x_i) − f̂(x_i)`, centered at zero.
    Residual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub kind: PlotKind,
    pub svg: String,
    /// CSV from which the plot can be reconstructed.
    pub data: String,
}

impl Plot {
    /// Writes `<stem>.svg` and `<stem>.data.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        let svg = dir.join(format!("{stem}.svg"));
        let data = dir.join(format!("{stem}.data.csv"));
        fs::write(&svg, &self.svg)?;
        fs::write(&data, &self.data)?;
        Ok((svg, data))
    }
}

// ---------------------------------------------------------------------------
// Axes and layout

#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Range> {
        let mut it = values.into_iter().filter(|v| v.is_finite());
        let first = it.next()?;
        let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Some(Range { lo, hi })
    }

    fn union(self, other: Range) -> Range {
        Range {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Data extent widened by 5% on each side (or ±0.5 when flat).
    fn padded(self) -> Range {
        let span = self.hi - self.lo;
        if span > 0.0 {
            Range {
                lo: self.lo - 0.05 * span,
                hi: self.hi + 0.05 * span,
            }
        } else {
            Range {
                lo: self.lo - 0.5,
                hi: self.hi + 0.5,
            }
        }
    }
}

/// Ticks on a 1-2-5 ladder, about five per axis.
fn ticks(range: Range) -> (Vec<f64>, usize) {
    let raw = (range.hi - range.lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (range.lo / step).ceil() as i64;
    let last = (range.hi / step).floor() as i64;
    let values = (first..=last).map(|k| k as f64 * step).collect();
    (values, decimals)
}

fn tick_label(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: Range,
    y: Range,
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        self.left + (v - self.x.lo) / (self.x.hi - self.x.lo) * self.width
    }

    fn py(&self, v: f64) -> f64 {
        self.top + self.height - (v - self.y.lo) / (self.y.hi - self.y.lo) * self.height
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Svg {
    body: String,
    width: u32,
    height: u32,
}

impl Svg {
    fn new(width: u32, height: u32) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r##"<rect x="0" y="0" width="{width}" height="{height}" fill="#FFFFFF"/>"##
        );
        Svg {
            body,
            width,
            height,
        }
    }

    fn finish(self) -> String {
        format!(
            concat!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ",
                "width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" ",
                "font-family=\"sans-serif\" font-size=\"11\">\n{body}</svg>\n"
            ),
            w = self.width,
            h = self.height,
            body = self.body
        )
    }

    fn axes(&mut self, frame: &Frame, x_label: &str, y_label: &str, tick_labels: bool) {
        let f = frame;
        let bottom = f.top + f.height;
        let _ = writeln!(self.body, r#"<g class="axes" stroke="{GREY}" fill="none">"#);
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
            f.left, f.top, f.width, f.height
        );
        let (xt, xd) = ticks(f.x);
        let (yt, yd) = ticks(f.y);
        for &t in &xt {
            let x = f.px(t);
            let _ = writeln!(
                self.body,
                r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
                bottom + 4.0
            );
        }
        for &t in &yt {
            let y = f.py(t);
            let _ = writeln!(
                self.body,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#,
                f.left - 4.0,
                f.left
            );
        }
        let _ = writeln!(self.body, "</g>");
        let _ = writeln!(self.body, r#"<g class="labels" fill="{GREY}">"#);
        if tick_labels {
            for &t in &xt {
                let _ = writeln!(
                    self.body,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    f.px(t),
                    bottom + 16.0,
                    tick_label(t, xd)
                );
            }
            for &t in &yt {
                let _ = writeln!(
                    self.body,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                    f.left - 6.0,
                    f.py(t) + 4.0,
                    tick_label(t, yd)
                );
            }
        }
        if !x_label.is_empty() {
            let _ = writeln!(
                self.body,
                r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                f.left + f.width / 2.0,
                bottom + if tick_labels { 34.0 } else { 14.0 },
                escape(x_label)
            );
        }
        if !y_label.is_empty() {
            let (x, y) = (
                f.left - if tick_labels { 44.0 } else { 10.0 },
                f.top + f.height / 2.0,
            );
            let _ = writeln!(
                self.body,
                r#"<text class="y-label" x="{x:.2}" y="{y:.2}" text-anchor="middle" transform="rotate(-90 {x:.2} {y:.2})">{}</text>"#,
                escape(y_label)
            );
        }
        let _ = writeln!(self.body, "</g>");
    }

    fn points<'a>(
        &mut self,
        frame: &Frame,
        radius: f64,
        points: impl Iterator<Item = (f64, f64, String, &'a str)>,
    ) {
        let _ = writeln!(self.body, r#"<g class="points" stroke="none">"#);
        for (x, y, fill, class) in points {
            let _ = writeln!(
                self.body,
                r#"<circle class="{class}" cx="{:.2}" cy="{:.2}" r="{radius}" fill="{fill}"/>"#,
                frame.px(x),
                frame.py(y)
            );
        }
        let _ = writeln!(self.body, "</g>");
    }

    fn polyline(&mut self, frame: &Frame, class: &str, xy: &[(f64, f64)], dashed: bool) {
        let coords: Vec<String> = xy
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let dash = if dashed {
            r#" stroke-dasharray="4 3""#
        } else {
            ""
        };
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            coords.join(" "),
            RED.hex()
        );
    }

    fn title(&mut self, x: f64, y: f64, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text class="title" x="{x:.2}" y="{y:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            escape(text)
        );
    }
}

fn single_frame(spec: &PlotSpec, x: Range, y: Range) -> Frame {
    let (left, right, top, bottom) = (64.0, 16.0, 28.0, 48.0);
    Frame {
        left,
        top,
        width: (spec.width as f64 - left - right).max(1.0),
        height: (spec.height as f64 - top - bottom).max(1.0),
        x: x.padded(),
        y: y.padded(),
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8")
}

fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Emit(format!("{what} contains non-finite values")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Renderers

/// 1D PD curve over the scatter of `(x_i, f̂(x_i))`.
pub fn render_pdp_overlay(
    spec: &PlotSpec,
    curve: &PdResult,
    predictions: &[f64],
    feature_values: &[f64],
) -> Result<Plot> {
    spec.validate()?;
    if curve.kind != PdKind::AtPoints || curve.columns.len() != 1 {
        return Err(Error::Emit(
            "overlay needs a 1D PD curve evaluated at grid points".into(),
        ));
    }
    if curve.values.is_empty() {
        return Err(Error::Emit("PD curve is empty".into()));
    }
    if predictions.len() != feature_values.len() {
        return Err(Error::Emit(format!(
            "{} predictions for {} feature values",
            predictions.len(),
            feature_values.len()
        )));
    }
    check_finite("predictions", predictions)?;
    check_finite("feature values", feature_values)?;
    let name = &curve.columns[0].name;
    let xy: Vec<(f64, f64)> = curve
        .points
        .iter()
        .zip(&curve.values)
        .map(|(p, &v)| (p[0], v))
        .collect();

    let x = Range::of(feature_values.iter().copied().chain(xy.iter().map(|p| p.0))).unwrap();
    let y = Range::of(predictions.iter().copied().chain(xy.iter().map(|p| p.1))).unwrap();
    let frame = single_frame(spec, x, y);
    let mut svg = Svg::new(spec.width, spec.height);
    svg.axes(
        &frame,
        spec.x_label.as_deref().unwrap_or(name),
        spec.y_label.as_deref().unwrap_or("prediction"),
        true,
    );
    let grey = "#9E9E9E".to_string();
    svg.points(
        &frame,
        spec.point_radius,
        feature_values
            .iter()
            .zip(predictions)
            .map(|(&x, &y)| (x, y, grey.clone(), "prediction")),
    );
    svg.polyline(&frame, "pd-curve", &xy, true);
    svg.title(
        spec.width as f64 / 2.0,
        18.0,
        &format!("Partial dependence on {name}"),
    );

    let mut data = csv_line(&["series".into(), name.clone(), "value".into()]);
    for (&xv, &yv) in feature_values.iter().zip(predictions) {
        data.push_str(&csv_line(&[
            "prediction".into(),
            format_f64(xv),
            format_f64(yv),
        ]));
    }
    for &(xv, yv) in &xy {
        data.push_str(&csv_line(&["pd".into(), format_f64(xv), format_f64(yv)]));
    }
    Ok(Plot {
        kind: PlotKind::PdpOverlay,
        svg: svg.finish(),
        data,
    })
}

/// Scatter of `(f̂(x_i), PD_s(x_i))` against the identity line, on equal
/// axis scales.
pub fn render_match_plot(spec: &PlotSpec, predictions: &[f64], pd_values: &[f64]) -> Result<Plot> {
    spec.validate()?;
    if predictions.len() != pd_values.len() {
        return Err(Error::Emit(format!(
            "{} predictions but {} PD values",
            predictions.len(),
            pd_values.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Emit("nothing to plot".into()));
    }
    check_finite("predictions", predictions)?;
    check_finite("PD values", pd_values)?;

    let both = Range::of(predictions.iter().copied())
        .unwrap()
        .union(Range::of(pd_values.iter().copied()).unwrap());
    let side = (spec.width.min(spec.height) as f64 - 64.0 - 16.0).max(1.0);
    let range = both.padded();
    let frame = Frame {
        left: 64.0,
        top: 28.0,
        width: side,
        height: side,
        x: range,
        y: range,
    };
    let mut svg = Svg::new(spec.width, spec.height);
    svg.axes(
        &frame,
        spec.x_label.as_deref().unwrap_or("prediction"),
        spec.y_label.as_deref().unwrap_or("partial dependence"),
        true,
    );
    let _ = writeln!(
        svg.body,
        r#"<line class="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{GREY}" stroke-dasharray="2 2"/>"#,
        frame.px(range.lo),
        frame.py(range.lo),
        frame.px(range.hi),
        frame.py(range.hi)
    );
    let blue = BLUE.hex();
    svg.points(
        &frame,
        spec.point_radius,
        predictions
            .iter()
            .zip(pd_values)
            .map(|(&x, &y)| (x, y, blue.clone(), "match")),
    );

    let mut data = csv_line(&["prediction".into(), "pd_value".into()]);
    for (&f, &pd) in predictions.iter().zip(pd_values) {
        data.push_str(&csv_line(&[format_f64(f), format_f64(pd)]));
    }
    Ok(Plot {
        kind: PlotKind::MatchPlot,
        svg: svg.finish(),
        data,
    })
}

/// Per-point color parameter in `[-1, 1]` and the value it encodes.
fn color_scale(values: &[f64], mode: Pd2dMode) -> Vec<f64> {
    match mode {
        Pd2dMode::Residual => {
            let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            values
                .iter()
                .map(|&v| if max > 0.0 { v / max } else { 0.0 })
                .collect()
        }
        Pd2dMode::Pd => {
            let r = Range::of(values.iter().copied()).unwrap();
            let (mid, half) = ((r.lo + r.hi) / 2.0, (r.hi - r.lo) / 2.0);
            values
                .iter()
                .map(|&v| {
                    if half > 0.0 {
                        ((v - mid) / half).clamp(-1.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    }
}

fn sign_class(t: f64) -> &'static str {
    if t < 0.0 {
        "neg"
    } else if t > 0.0 {
        "pos"
    } else {
        "zero"
    }
}

/// Observations in the plane of two subset columns, colored by PD value
/// or by `PD − f̂`.
pub fn render_pd2d(
    spec: &PlotSpec,
    surface: &PdResult,
    mode: Pd2dMode,
    predictions: Option<&[f64]>,
) -> Result<Plot> {
    spec.validate()?;
    if surface.columns.len() != 2 {
        return Err(Error::Emit(format!(
            "2D plot needs a PD over exactly 2 columns, got {}",
            surface.columns.len()
        )));
    }
    if surface.values.is_empty() {
        return Err(Error::Emit("PD surface is empty".into()));
    }
    let colored: Vec<f64> = match mode {
        Pd2dMode::Pd => surface.values.clone(),
        Pd2dMode::Residual => {
            let f =
                predictions.ok_or_else(|| Error::Emit("residual mode needs predictions".into()))?;
            if f.len() != surface.values.len() {
                return Err(Error::Emit(format!(
                    "{} predictions for {} PD values",
                    f.len(),
                    surface.values.len()
                )));
            }
            check_finite("predictions", f)?;
            surface.values.iter().zip(f).map(|(pd, f)| pd - f).collect()
        }
    };
    let (xn, yn) = (&surface.columns[0].name, &surface.columns[1].name);
    let x = Range::of(surface.points.iter().map(|p| p[0])).unwrap();
    let y = Range::of(surface.points.iter().map(|p| p[1])).unwrap();
    let frame = single_frame(spec, x, y);
    let mut svg = Svg::new(spec.width, spec.height);
    svg.axes(
        &frame,
        spec.x_label.as_deref().unwrap_or(xn),
        spec.y_label.as_deref().unwrap_or(yn),
        true,
    );
    let scale = color_scale(&colored, mode);
    svg.points(
        &frame,
        spec.point_radius,
        surface
            .points
            .iter()
            .zip(&scale)
            .map(|(p, &t)| (p[0], p[1], diverging(t).hex(), sign_class(t))),
    );
    let title = match mode {
        Pd2dMode::Pd => format!("Partial dependence on {xn} and {yn}"),
        Pd2dMode::Residual => format!("PD − prediction over {xn} and {yn}"),
    };
    svg.title(spec.width as f64 / 2.0, 18.0, &title);

    let value_name = match mode {
        Pd2dMode::Pd => "pd_value",
        Pd2dMode::Residual => "residual",
    };
    let mut data = csv_line(&[xn.clone(), yn.clone(), value_name.into()]);
    for (p, v) in surface.points.iter().zip(&colored) {
        data.push_str(&csv_line(&[
            format_f64(p[0]),
            format_f64(p[1]),
            format_f64(*v),
        ]));
    }
    Ok(Plot {
        kind: match mode {
            Pd2dMode::Pd => PlotKind::Pd2dScatter,
            Pd2dMode::Residual => PlotKind::ResidualScatter,
        },
        svg: svg.finish(),
        data,
    })
}

/// `k × k` grid: cell `(i, j)` off the diagonal is the 2D PD scatter of
/// columns `j` (horizontal) and `i` (vertical); diagonal cells show the 1D
/// PD curve of their column.
pub fn render_matrix(
    spec: &PlotSpec,
    columns: &[&str],
    surfaces: &[PdResult],
    curves: &[PdResult],
) -> Result<Plot> {
    spec.validate()?;
    let k = columns.len();
    if k < 2 {
        return Err(Error::Emit(format!(
            "a scatterplot matrix needs at least 2 columns, got {k}"
        )));
    }
    let names = |r: &PdResult| r.columns.iter().map(|c| c.name.clone()).collect::<Vec<_>>();
    let find_surface = |a: &str, b: &str| {
        surfaces.iter().find(|s| {
            let n = names(s);
            n.len() == 2 && ((n[0] == a && n[1] == b) || (n[0] == b && n[1] == a))
        })
    };
    let mut missing = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if find_surface(columns[i], columns[j]).is_none() {
                missing.push(format!("({}, {})", columns[i], columns[j]));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Emit(format!(
            "missing 2D PD for pair(s) {}",
            missing.join(", ")
        )));
    }
    let curve_of = |c: &str| {
        curves
            .iter()
            .find(|r| r.columns.len() == 1 && r.columns[0].name == c && !r.values.is_empty())
            .ok_or_else(|| Error::Emit(format!("missing 1D PD curve for `{c}`")))
    };
    let diag: Vec<&PdResult> = columns.iter().map(|c| curve_of(c)).collect::<Result<_>>()?;

    // Shared color scale across panels so colors are comparable.
    let all_pd: Vec<f64> = surfaces
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .collect();
    check_finite("PD values", &all_pd)?;
    let pd_range = Range::of(all_pd.iter().copied()).unwrap();
    let (mid, half) = (
        (pd_range.lo + pd_range.hi) / 2.0,
        (pd_range.hi - pd_range.lo) / 2.0,
    );
    let t_of = |v: f64| {
        if half > 0.0 {
            ((v - mid) / half).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    };

    let (margin, gap) = (36.0, 8.0);
    let cell_w = ((spec.width as f64 - 2.0 * margin) / k as f64 - gap).max(1.0);
    let cell_h = ((spec.height as f64 - 2.0 * margin) / k as f64 - gap).max(1.0);
    let mut svg = Svg::new(spec.width, spec.height);
    let mut data = csv_line(&[
        "panel_row".into(),
        "panel_col".into(),
        "kind".into(),
        "x".into(),
        "y".into(),
        "value".into(),
    ]);
    let radius = (spec.point_radius * 0.6).max(0.5);

    for i in 0..k {
        for j in 0..k {
            let left = margin + j as f64 * (cell_w + gap);
            let top = margin + i as f64 * (cell_h + gap);
            let _ = writeln!(
                svg.body,
                r#"<g class="panel" data-row="{i}" data-col="{j}">"#
            );
            if i == j {
                let c = diag[i];
                let xy: Vec<(f64, f64)> = c
                    .points
                    .iter()
                    .zip(&c.values)
                    .map(|(p, &v)| (p[0], v))
                    .collect();
                let frame = Frame {
                    left,
                    top,
                    width: cell_w,
                    height: cell_h,
                    x: Range::of(xy.iter().map(|p| p.0)).unwrap().padded(),
                    y: Range::of(xy.iter().map(|p| p.1)).unwrap().padded(),
                };
                svg.axes(&frame, "", "", false);
                svg.polyline(&frame, "pd-curve", &xy, false);
                svg.title(left + cell_w / 2.0, top + 14.0, columns[i]);
                for &(x, y) in &xy {
                    data.push_str(&csv_line(&[
                        i.to_string(),
                        j.to_string(),
                        "curve".into(),
                        format_f64(x),
                        format_f64(y),
                        format_f64(y),
                    ]));
                }
            } else {
                let s = find_surface(columns[i], columns[j]).unwrap();
                // Horizontal axis is column j, vertical is column i.
                let xpos = if names(s)[0] == columns[j] { 0 } else { 1 };
                let ypos = 1 - xpos;
                let frame = Frame {
                    left,
                    top,
                    width: cell_w,
                    height: cell_h,
                    x: Range::of(s.points.iter().map(|p| p[xpos]))
                        .unwrap()
                        .padded(),
                    y: Range::of(s.points.iter().map(|p| p[ypos]))
                        .unwrap()
                        .padded(),
                };
                svg.axes(&frame, "", "", false);
                svg.points(
                    &frame,
                    radius,
                    s.points.iter().zip(&s.values).map(|(p, &v)| {
                        let t = t_of(v);
                        (p[xpos], p[ypos], diverging(t).hex(), sign_class(t))
                    }),
                );
                for (p, &v) in s.points.iter().zip(&s.values) {
                    data.push_str(&csv_line(&[
                        i.to_string(),
                        j.to_string(),
                        "scatter".into(),
                        format_f64(p[xpos]),
                        format_f64(p[ypos]),
                        format_f64(v),
                    ]));
                }
            }
            let _ = writeln!(svg.body, "</g>");
        }
    }
    Ok(Plot {
        kind: PlotKind::Matrix,
        svg: svg.finish(),
        data,
    })
}
