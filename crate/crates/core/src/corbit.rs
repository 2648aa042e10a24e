//! SVG rendering of Corbit and R-Corbit plots.
//!
//! Stage `r` sits on the `r`-th ring counted from the inside; lag `h` sits at
//! angle `2π(h-1)/H` clockwise from twelve o'clock. Colour and radius encode
//! the cell value; degenerate cells are hollow.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::autocorr::{CorbitGrid, Correlation};
use crate::error::{GnarError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    fn mix(self, other: Rgb, t: f64) -> Rgb {
        let lerp = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
        Rgb(lerp(self.0, other.0), lerp(self.1, other.1), lerp(self.2, other.2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Minimum canvas side; grown when the rings need more room.
    pub size: f64,
    pub inner_radius: f64,
    pub ring_gap: f64,
    pub min_point_radius: f64,
    pub max_point_radius: f64,
    /// Radius of each R-Corbit community circle around its mean marker.
    pub cluster_radius: f64,
    pub font_size: f64,
    pub margin: f64,
    /// Colour at -1.
    pub negative: Rgb,
    /// Colour at 0.
    pub neutral: Rgb,
    /// Colour at +1.
    pub positive: Rgb,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            size: 480.0,
            inner_radius: 60.0,
            ring_gap: 50.0,
            min_point_radius: 2.0,
            max_point_radius: 12.0,
            cluster_radius: 12.0,
            font_size: 12.0,
            margin: 8.0,
            negative: Rgb(0x21, 0x66, 0xac),
            neutral: Rgb(0xf7, 0xf7, 0xf7),
            positive: Rgb(0xb2, 0x18, 0x2b),
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<()> {
        let dims = [
            self.size,
            self.inner_radius,
            self.ring_gap,
            self.min_point_radius,
            self.max_point_radius,
            self.cluster_radius,
            self.font_size,
        ];
        if dims.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || !(self.margin.is_finite() && self.margin >= 0.0)
            || self.max_point_radius < self.min_point_radius
        {
            return Err(GnarError::Render("render options need positive finite dimensions".into()));
        }
        Ok(())
    }

    /// Diverging scale; values are clamped to `[-1, 1]`.
    pub fn colour(&self, value: f64) -> Rgb {
        let v = value.clamp(-1.0, 1.0);
        if v < 0.0 {
            self.neutral.mix(self.negative, -v)
        } else {
            self.neutral.mix(self.positive, v)
        }
    }

    pub fn point_radius(&self, value: f64) -> f64 {
        let v = value.abs().min(1.0);
        self.min_point_radius + (self.max_point_radius - self.min_point_radius) * v
    }
}

struct Layout {
    centre: f64,
    width: f64,
    height: f64,
    label_radius: f64,
}

impl Layout {
    fn new(opts: &RenderOptions, stages: usize, point_extent: f64, legend_height: f64) -> Self {
        let outer = opts.inner_radius + opts.ring_gap * (stages - 1) as f64;
        let label_radius = outer + point_extent + opts.font_size;
        let needed = 2.0 * (label_radius + opts.font_size + opts.margin);
        let side = needed.max(opts.size);
        Self {
            centre: side / 2.0,
            width: side,
            height: side + legend_height,
            label_radius,
        }
    }

    fn ring_radius(opts: &RenderOptions, r: usize) -> f64 {
        opts.inner_radius + opts.ring_gap * (r - 1) as f64
    }

    fn polar(&self, radius: f64, turn: f64) -> (f64, f64) {
        let angle = 2.0 * PI * turn - PI / 2.0;
        (self.centre + radius * angle.cos(), self.centre + radius * angle.sin())
    }
}

fn header(out: &mut String, layout: &Layout, title: &str) {
    let _ = writeln!(
        out,
        r##"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">
<title>{title}</title>
<rect class="background" x="0" y="0" width="{w:.0}" height="{h:.0}" fill="#ffffff"/>"##,
        w = layout.width,
        h = layout.height,
    );
}

fn rings_and_labels(out: &mut String, layout: &Layout, opts: &RenderOptions, lags: usize, stages: usize) {
    for r in 1..=stages {
        let _ = writeln!(
            out,
            r##"<circle class="ring" data-stage="{r}" cx="{c:.3}" cy="{c:.3}" r="{rad:.3}" fill="none" stroke="#bbbbbb" stroke-width="1"/>"##,
            c = layout.centre,
            rad = Layout::ring_radius(opts, r),
        );
    }
    for h in 1..=lags {
        let (x, y) = layout.polar(layout.label_radius, (h - 1) as f64 / lags as f64);
        let _ = writeln!(
            out,
            r##"<text class="lag-label" data-lag="{h}" x="{x:.3}" y="{y:.3}" font-size="{fs}" font-family="sans-serif" text-anchor="middle" dominant-baseline="middle">{h}</text>"##,
            fs = opts.font_size,
        );
    }
    let _ = writeln!(
        out,
        r##"<circle class="zero-marker" data-value="0" cx="{c:.3}" cy="{c:.3}" r="{rad:.3}" fill="{fill}" stroke="#333333" stroke-width="1"/>"##,
        c = layout.centre,
        rad = opts.min_point_radius,
        fill = opts.colour(0.0).hex(),
    );
}

fn point(
    out: &mut String,
    class: &str,
    (x, y): (f64, f64),
    radius: f64,
    cell: Correlation,
    opts: &RenderOptions,
    attrs: &str,
) {
    let colour = opts.colour(cell.value).hex();
    let (class, fill, stroke) = if cell.degenerate {
        (format!("{class} degenerate"), "none".to_string(), "#777777".to_string())
    } else {
        (class.to_string(), colour, "#333333".to_string())
    };
    let _ = writeln!(
        out,
        r#"<circle class="{class}" {attrs} data-value="{v}" data-degenerate="{d}" cx="{x:.3}" cy="{y:.3}" r="{radius:.3}" fill="{fill}" stroke="{stroke}" stroke-width="0.5"/>"#,
        v = cell.value,
        d = cell.degenerate,
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Corbit plot of a grid without a community dimension.
pub fn render_corbit(grid: &CorbitGrid, opts: &RenderOptions) -> Result<String> {
    opts.validate()?;
    if grid.communities.is_some() {
        return Err(GnarError::Render(
            "community grids are drawn with render_rcorbit".into(),
        ));
    }
    let layout = Layout::new(opts, grid.max_stage, opts.max_point_radius, 0.0);
    let mut out = String::new();
    header(&mut out, &layout, &format!("{} Corbit plot", grid.kind.as_str()));
    rings_and_labels(&mut out, &layout, opts, grid.max_lag, grid.max_stage);
    for h in 1..=grid.max_lag {
        let turn = (h - 1) as f64 / grid.max_lag as f64;
        for r in 1..=grid.max_stage {
            let cell = grid.get(None, h, r);
            let pos = layout.polar(Layout::ring_radius(opts, r), turn);
            let radius = if cell.degenerate {
                opts.min_point_radius
            } else {
                opts.point_radius(cell.value)
            };
            point(&mut out, "point", pos, radius, cell, opts, &format!(r#"data-lag="{h}" data-stage="{r}" data-community="all""#));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// R-Corbit plot: per `(h, r)` a circle of `C` community points around the
/// mean marker. Community `c` sits at turn `(c-1)/C` of each small circle.
pub fn render_rcorbit(grid: &CorbitGrid, opts: &RenderOptions) -> Result<String> {
    opts.validate()?;
    let Some(labels) = &grid.communities else {
        return Err(GnarError::Render(
            "grid has no community dimension; use render_corbit".into(),
        ));
    };
    let count = labels.len();
    if count < 2 {
        return Err(GnarError::Render(format!(
            "R-Corbit needs at least 2 communities, grid has {count}"
        )));
    }
    let small = opts.max_point_radius / 2.0;
    let point_scale = |v: f64| (opts.min_point_radius / 2.0) + (small - opts.min_point_radius / 2.0) * v.abs().min(1.0);
    let row = opts.font_size * 1.6;
    let legend_height = row * (count + 1) as f64 + opts.margin;
    let layout = Layout::new(opts, grid.max_stage, opts.cluster_radius + small, legend_height);
    let mut out = String::new();
    header(&mut out, &layout, &format!("{} R-Corbit plot", grid.kind.as_str()));
    rings_and_labels(&mut out, &layout, opts, grid.max_lag, grid.max_stage);
    for h in 1..=grid.max_lag {
        let turn = (h - 1) as f64 / grid.max_lag as f64;
        for r in 1..=grid.max_stage {
            let (cx, cy) = layout.polar(Layout::ring_radius(opts, r), turn);
            for (c, _) in labels.iter().enumerate() {
                let cell = grid.get(Some(c), h, r);
                let a = 2.0 * PI * c as f64 / count as f64 - PI / 2.0;
                let pos = (cx + opts.cluster_radius * a.cos(), cy + opts.cluster_radius * a.sin());
                let radius = if cell.degenerate { opts.min_point_radius / 2.0 } else { point_scale(cell.value) };
                point(&mut out, "point", pos, radius, cell, opts, &format!(r#"data-lag="{h}" data-stage="{r}" data-community="{}""#, c + 1));
            }
            let mean = grid.mean(h, r).expect("community grids carry a mean layer");
            let radius = if mean.degenerate { opts.min_point_radius / 2.0 } else { point_scale(mean.value) };
            point(&mut out, "mean", (cx, cy), radius, mean, opts, &format!(r#"data-lag="{h}" data-stage="{r}" data-community="mean""#));
        }
    }
    let top = layout.width + opts.margin;
    let x0 = opts.margin + opts.font_size;
    let _ = writeln!(
        out,
        r#"<g class="legend"><text class="legend-title" x="{x:.3}" y="{y:.3}" font-size="{fs}" font-family="sans-serif" dominant-baseline="middle">community (position clockwise from twelve o'clock)</text>"#,
        x = opts.margin,
        y = top + row / 2.0,
        fs = opts.font_size,
    );
    for (c, label) in labels.iter().enumerate() {
        let y = top + row * (c as f64 + 1.5);
        let a = 2.0 * PI * c as f64 / count as f64 - PI / 2.0;
        let glyph = opts.font_size / 2.0;
        let _ = writeln!(
            out,
            r##"<circle class="legend-glyph" cx="{gx:.3}" cy="{gy:.3}" r="{rr:.3}" fill="#333333"/><text class="legend-entry" data-community="{n}" x="{tx:.3}" y="{y:.3}" font-size="{fs}" font-family="sans-serif" dominant-baseline="middle">{label}</text>"##,
            gx = x0 + glyph * a.cos(),
            gy = y + glyph * a.sin(),
            rr = opts.font_size / 6.0,
            n = c + 1,
            tx = x0 + opts.font_size,
            fs = opts.font_size,
            label = escape(label),
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
