use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    in_epperson_with_margin, in_epq, in_rp, in_sector_with_margin, theorem_main_feasible,
    ExponentConfig, WeylParameter,
};
use crate::error::{invalid, Result};

/// A region of the z-plane (`Epperson`, `Epq`) or the s-plane (the rest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Epperson { p: f64 },
    Sector { theta: f64 },
    Rp { p: f64 },
    TheoremMain { cfg: ExponentConfig },
    Epq { p: f64, q: f64 },
}

impl Region {
    /// Membership of a single point. `eps` widens the strict inequalities of
    /// the sector and Epperson predicates; zero reproduces them exactly.
    pub fn contains(&self, point: Complex64, eps: f64) -> bool {
        match *self {
            Region::Epperson { p } => point.re > 0.0 && in_epperson_with_margin(point, p, eps),
            Region::Sector { theta } => in_sector_with_margin(point, theta, eps),
            Region::Rp { p } => in_rp(point, p),
            Region::TheoremMain { cfg } => match WeylParameter::new(point) {
                Ok(s) => theorem_main_feasible(&s, &cfg),
                Err(_) => false,
            },
            Region::Epq { p, q } => in_epq(point, p, q).unwrap_or(false),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Region::Epperson { p } => format!("E_p, p = {p}"),
            Region::Sector { theta } => format!("sector, theta = {theta}"),
            Region::Rp { p } => format!("R_p, p = {p}"),
            Region::TheoremMain { cfg } => format!(
                "feasible s, p = {}, q = {}, alpha = {}, beta = {}",
                cfg.p, cfg.q, cfg.alpha, cfg.beta
            ),
            Region::Epq { p, q } => format!("E_pq, p = {p}, q = {q}"),
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let w = Self { x0, x1, y0, y1 };
        if !(x1 > x0 && y1 > y0) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(invalid("window", format!("zero or negative area: {w:?}")));
        }
        Ok(w)
    }

    /// Cell-centred grid coordinates along one axis. Offsets are symmetric
    /// about the centre, so a window symmetric about zero yields exactly
    /// negated coordinates.
    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let centre = 0.5 * (lo + hi);
        let h = (hi - lo) / n as f64;
        let mid = 0.5 * (n as f64 - 1.0);
        (0..n).map(|i| centre + (i as f64 - mid) * h).collect()
    }
}

/// Membership of every point of a `resolution × resolution` grid.
///
/// Points are stored row by row, `im` ascending, and `re` ascending within a
/// row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSample {
    pub region: Region,
    pub window: Window,
    pub resolution: usize,
    pub points: Vec<(f64, f64, bool)>,
}

impl RegionSample {
    pub fn member_fraction(&self) -> f64 {
        let hits = self.points.iter().filter(|p| p.2).count();
        hits as f64 / self.points.len() as f64
    }

    /// True iff every member of `self` is a member of `other` on the same
    /// grid.
    pub fn is_subset_of(&self, other: &RegionSample) -> bool {
        self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| a.0 == b.0 && a.1 == b.1 && (!a.2 || b.2))
    }

    /// CSV with header `re,im,member`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 24 + 16);
        out.push_str("re,im,member\n");
        for &(re, im, m) in &self.points {
            let _ = writeln!(out, "{re},{im},{}", m as u8);
        }
        out
    }

    /// A single-file SVG: members of `self` in red, members of `overlay`
    /// (drawn on top) in orange, everything else white.
    pub fn to_svg(&self, overlay: Option<&RegionSample>) -> String {
        const PIXELS: f64 = 600.0;
        const BASE: &str = "#d62728";
        const TOP: &str = "#ff7f0e";
        let n = self.resolution;
        let w = self.window;
        let aspect = (w.y1 - w.y0) / (w.x1 - w.x0);
        let (width, height) = (PIXELS, PIXELS * aspect);
        let (cw, ch) = (width / n as f64, height / n as f64);
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}" shape-rendering="crispEdges">"#
        );
        let _ = writeln!(svg, "<title>{}</title>", self.region.label());
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for (k, &(_, _, member)) in self.points.iter().enumerate() {
            let (i, j) = (k % n, k / n);
            let top = overlay.map(|o| o.points[k].2).unwrap_or(false);
            let fill = if top {
                TOP
            } else if member {
                BASE
            } else {
                continue;
            };
            // svg y grows downwards
            let (px, py) = (i as f64 * cw, (n - 1 - j) as f64 * ch);
            let _ = writeln!(
                svg,
                r#"<rect x="{px:.3}" y="{py:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
                cw + 0.01,
                ch + 0.01
            );
        }
        // axes through the origin when visible
        if w.x0 <= 0.0 && 0.0 <= w.x1 {
            let x = -w.x0 / (w.x1 - w.x0) * width;
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.3}" y1="0" x2="{x:.3}" y2="{height:.3}" stroke="black" stroke-width="1"/>"#
            );
        }
        if w.y0 <= 0.0 && 0.0 <= w.y1 {
            let y = w.y1 / (w.y1 - w.y0) * height;
            let _ = writeln!(
                svg,
                r#"<line x1="0" y1="{y:.3}" x2="{width:.3}" y2="{y:.3}" stroke="black" stroke-width="1"/>"#
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Samples `region` on a `resolution × resolution` cell-centred grid over
/// `window`. Evaluation is point-parallel; output order is deterministic.
pub fn sample_region(region: Region, window: Window, resolution: usize) -> Result<RegionSample> {
    sample_region_with_margin(region, window, resolution, 0.0)
}

pub fn sample_region_with_margin(
    region: Region,
    window: Window,
    resolution: usize,
    eps: f64,
) -> Result<RegionSample> {
    if resolution < 2 {
        return Err(invalid("resolution", "need at least 2 points per axis"));
    }
    let window = Window::new(window.x0, window.x1, window.y0, window.y1)?;
    let xs = Window::axis(window.x0, window.x1, resolution);
    let ys = Window::axis(window.y0, window.y1, resolution);
    let points = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (re, im) = (xs[k % resolution], ys[k / resolution]);
            (re, im, region.contains(Complex64::new(re, im), eps))
        })
        .collect();
    Ok(RegionSample {
        region,
        window,
        resolution,
        points,
    })
}
