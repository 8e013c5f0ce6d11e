//! Schur-test bounds for `exp(-s(P² + Q²))` and `exp(-zL)` between
//! Gaussian `L^p` spaces.
//!
//! With `A₁ = 1 - 2/(αp) + r₊` and `A₂ = 2/(βq) - 1 + r₊`, the two Schur
//! suprema for the kernel of `exp(-s(P² + Q²))` against the densities of
//! `γ_α`, `γ_β` evaluate exactly to
//!
//! ```text
//! C₁ = 2^{-d} (2π|s|)^{-d/2} (2πα)^{d/2p} (2πβ)^{-d/2q} (4π / (r A₁))^{d/2r}
//! C₂ = the same with A₂ in place of A₁
//! ```
//!
//! once `r₋² ≤ A₁A₂` makes the remaining Gaussian in the free variable
//! non-increasing. Interpolating gives `C₁^{1-r/q} C₂^{r/q}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmath::{expm1, rel_diff_real};
use crate::error::{invalid, Error, Result};
use crate::plane_map::{feasibility, z_to_s, ComplexTime, ExponentConfig, WeylParameter};
use crate::quadrature::{QuadKind, QuadratureSpec};
use crate::report::{deserialize_f64, serialize_f64};
use crate::weyl_kernel::{GaussianKernelForm, GaussianMeasure};

/// Half-width of the grid on which the numerical suprema are taken.
pub const SUP_RADIUS: f64 = 8.0;
pub const SUP_POINTS: usize = 400;
/// Relative size of an edge term above which a truncated integral is
/// declared divergent.
const EDGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ClosedForm,
    Numeric,
}

/// Where the numerical suprema and integrals were taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurGrid {
    pub sup_radius: f64,
    pub sup_points: usize,
    pub window: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    pub feasible: bool,
    #[serde(
        rename = "C1",
        serialize_with = "serialize_f64",
        deserialize_with = "deserialize_f64"
    )]
    pub c1: f64,
    #[serde(
        rename = "C2",
        serialize_with = "serialize_f64",
        deserialize_with = "deserialize_f64"
    )]
    pub c2: f64,
    #[serde(serialize_with = "serialize_f64", deserialize_with = "deserialize_f64")]
    pub bound: f64,
    pub r: f64,
    /// `r/q`
    #[serde(rename = "theta")]
    pub interpolation_theta: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SchurGrid>,
}

impl SchurReport {
    fn from_logs(ln_c1: f64, ln_c2: f64, cfg: &ExponentConfig, provenance: Provenance) -> Self {
        let theta = cfg.r / cfg.q;
        let (c1, c2) = (ln_c1.exp(), ln_c2.exp());
        let finite = ln_c1.is_finite() && ln_c2.is_finite();
        let bound = if finite {
            ((1.0 - theta) * ln_c1 + theta * ln_c2).exp()
        } else {
            f64::INFINITY
        };
        Self {
            feasible: finite,
            c1,
            c2,
            bound,
            r: cfg.r,
            interpolation_theta: theta,
            provenance,
            grid: None,
        }
    }
}

/// `(2r)^{-d/2} (αr/2)^{d/2p} (βr/2)^{-d/2q}`.
pub fn theorem_constant(cfg: &ExponentConfig) -> f64 {
    let (d, r) = (cfg.d as f64, cfg.r);
    ((-0.5 * d) * (2.0 * r).ln() + d / (2.0 * cfg.p) * (cfg.alpha * r / 2.0).ln()
        - d / (2.0 * cfg.q) * (cfg.beta * r / 2.0).ln())
    .exp()
}

/// Exact Schur constants for the kernel of `exp(-s(P² + Q²))`; the complex
/// factor `s^{-d/2}` enters through its modulus. Infeasible inputs report
/// `feasible = false` and an infinite bound.
pub fn closed_form_bound(s: &WeylParameter, cfg: &ExponentConfig) -> SchurReport {
    let f = feasibility(s, cfg);
    let (d, r) = (cfg.d as f64, cfg.r);
    let ln_common = d / (2.0 * cfg.p) * (2.0 * PI * cfg.alpha).ln()
        - d / (2.0 * cfg.q) * (2.0 * PI * cfg.beta).ln()
        - d * 2f64.ln()
        - 0.5 * d * (2.0 * PI * s.s.norm()).ln();
    // without the quadratic condition both suprema are infinite
    let ln_c = |margin: f64| {
        if f.feasible {
            ln_common + d / (2.0 * r) * (4.0 * PI / (r * margin)).ln()
        } else {
            f64::INFINITY
        }
    };
    SchurReport::from_logs(
        ln_c(f.source_margin),
        ln_c(f.target_margin),
        cfg,
        Provenance::ClosedForm,
    )
}

/// The bound for `exp(-zL)` computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupBound {
    pub s: WeylParameter,
    /// Evaluated directly in terms of `e^{-2z}`.
    #[serde(serialize_with = "serialize_f64", deserialize_with = "deserialize_f64")]
    pub direct: f64,
    /// `|1 + s|^d` times the closed-form bound at `s`.
    #[serde(serialize_with = "serialize_f64", deserialize_with = "deserialize_f64")]
    pub chained: f64,
    /// Relative difference of the two; zero when both are infinite.
    pub agreement: f64,
    pub schur: SchurReport,
}

pub fn exp_zl_bound(z: ComplexTime, cfg: &ExponentConfig) -> Result<SemigroupBound> {
    let s = z_to_s(z)?;
    let schur = closed_form_bound(&s, cfg);
    let d = cfg.d as f64;
    let chained = (Complex64::new(1.0, 0.0) + s.s).norm().powf(d) * schur.bound;

    let one_minus = -expm1(-2.0 * z.z);
    let r_plus = ((2.0 - one_minus) / one_minus).re;
    let a1 = 1.0 - 2.0 / (cfg.alpha * cfg.p) + r_plus;
    let a2 = 2.0 / (cfg.beta * cfg.q) - 1.0 + r_plus;
    let direct = if schur.feasible {
        2f64.powf(d) * theorem_constant(cfg)
            / one_minus.norm().powf(0.5 * d)
            / (a1.powf(0.5 * d * (1.0 - 1.0 / cfg.p)) * a2.powf(0.5 * d / cfg.q))
    } else {
        f64::INFINITY
    };
    let agreement = if direct.is_infinite() && chained.is_infinite() {
        0.0
    } else {
        rel_diff_real(direct, chained)
    };
    Ok(SemigroupBound {
        s,
        direct,
        chained,
        agreement,
        schur,
    })
}

/// Logarithm of `∫ exp(g(x)) dx` by a trapezoid rule, or `+∞` when the
/// integrand has not decayed at the ends of the window.
fn log_integral(rule: &[(f64, f64)], g: impl Fn(f64) -> f64) -> f64 {
    let logs: Vec<f64> = rule.iter().map(|&(x, w)| g(x) + w.ln()).collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if peak.is_nan() || peak == f64::INFINITY {
        return f64::INFINITY;
    }
    let edge = logs[0].max(logs[logs.len() - 1]);
    if edge - peak > EDGE_TOLERANCE.ln() {
        return f64::INFINITY;
    }
    peak + logs.iter().map(|l| (l - peak).exp()).sum::<f64>().ln()
}

/// Whether the values at the end of a sup-grid are still strictly growing
/// over the last tenth of the grid, on either side.
fn grows_at_edge(values: &[f64]) -> bool {
    let tail = (values.len() / 10).max(2);
    let rising = |v: &[f64]| {
        v.windows(2)
            .all(|w| w[1] > w[0] + 1e-9 * w[0].abs().max(1.0))
    };
    let n = values.len();
    let right = &values[n - tail..];
    let left: Vec<f64> = values[..tail].iter().rev().copied().collect();
    rising(right) || rising(&left)
}

/// Numerical Schur test in one dimension.
///
/// The kernel and the weights are passed as logarithms, `ln|K(y, x)|`,
/// `ln φ(x)` and `ln ψ(y)`, so Gaussian factors far out in the tails neither
/// overflow nor underflow. `C₁` is the supremum over a grid of `y` of the
/// `x`-integral and `C₂` the supremum over `x` of the `y`-integral; both
/// integrals use the trapezoid rule of `quad`.
pub fn numeric_schur<K, Phi, Psi>(
    ln_kernel: K,
    ln_phi: Phi,
    ln_psi: Psi,
    cfg: &ExponentConfig,
    quad: &QuadratureSpec,
) -> Result<SchurReport>
where
    K: Fn(f64, f64) -> f64 + Sync,
    Phi: Fn(f64) -> f64 + Sync,
    Psi: Fn(f64) -> f64 + Sync,
{
    quad.validate()?;
    if cfg.d != 1 || quad.dim != 1 {
        return Err(Error::Dimension {
            dim: cfg.d.max(quad.dim),
            reason: "numeric Schur test is one-dimensional",
        });
    }
    if quad.kind != QuadKind::Trapezoid {
        return Err(invalid(
            "quad",
            "numeric Schur test integrates with the trapezoid rule",
        ));
    }
    let (p, q, r) = (cfg.p, cfg.q, cfg.r);
    let rule = quad.lebesgue_rule();
    let sup_grid: Vec<f64> = (0..SUP_POINTS)
        .map(|k| -SUP_RADIUS + 2.0 * SUP_RADIUS * k as f64 / (SUP_POINTS - 1) as f64)
        .collect();
    let term = |y: f64, x: f64| r * ln_kernel(y, x) + r / q * ln_psi(y) - r / p * ln_phi(x);

    let rows: Vec<f64> = sup_grid
        .par_iter()
        .map(|&y| log_integral(&rule, |x| term(y, x)) / r)
        .collect();
    let cols: Vec<f64> = sup_grid
        .par_iter()
        .map(|&x| log_integral(&rule, |y| term(y, x)) / r)
        .collect();
    let sup = |v: &[f64]| {
        if v.iter().any(|l| l.is_infinite() && *l > 0.0) || grows_at_edge(v) {
            f64::INFINITY
        } else {
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        }
    };
    let mut report = SchurReport::from_logs(sup(&rows), sup(&cols), cfg, Provenance::Numeric);
    report.grid = Some(SchurGrid {
        sup_radius: SUP_RADIUS,
        sup_points: SUP_POINTS,
        window: quad.window,
        nodes: quad.nodes,
    });
    Ok(report)
}

/// [`numeric_schur`] for a Gaussian kernel against the densities of `γ_α`
/// and `γ_β`.
pub fn numeric_schur_gaussian(
    kernel: &GaussianKernelForm,
    cfg: &ExponentConfig,
    quad: &QuadratureSpec,
) -> Result<SchurReport> {
    let phi = GaussianMeasure::new(cfg.alpha, 1)?;
    let psi = GaussianMeasure::new(cfg.beta, 1)?;
    numeric_schur(
        |y, x| kernel.ln_abs(&[y], &[x]),
        |x| phi.ln_density(&[x]),
        |y| psi.ln_density(&[y]),
        cfg,
        quad,
    )
}

/// `t* = ½ ln((q-1)/(p-1))`, the first real time at which the criterion
/// holds for `α = β = 1`.
pub fn nelson_threshold(p: f64, q: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    if !(q >= p && q.is_finite()) {
        return Err(invalid(
            "p,q",
            format!("need p <= q < inf, got p = {p}, q = {q}"),
        ));
    }
    Ok(0.5 * ((q - 1.0) / (p - 1.0)).ln())
}

/// Whether `2d/(d+2) < p ≤ 2`, together with the exponent
/// `(d/2)(1/p - 1/2)`, which is below one throughout that range.
pub fn sobolev_feasible(p: f64, d: usize) -> (bool, f64) {
    let d = d as f64;
    let exponent = 0.5 * d * (1.0 / p - 0.5);
    let feasible = p > 2.0 * d / (d + 2.0) && p <= 2.0;
    debug_assert!(!feasible || exponent < 1.0);
    (feasible, exponent)
}

/// `α_{p,t} = (1 + e^{-2t}) / p`.
pub fn bbg_alpha(p: f64, t: f64) -> f64 {
    (1.0 + (-2.0 * t).exp()) / p
}

/// Relative gap of the closed-form bound from the numerical Schur test on
/// the same kernel, a convenience for sweeps.
pub fn closed_vs_numeric(
    s: &WeylParameter,
    cfg: &ExponentConfig,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let closed = closed_form_bound(s, cfg);
    let kernel = crate::weyl_kernel::kernel_of_gaussian_symbol(s, 1);
    let numeric = numeric_schur_gaussian(&kernel, cfg, quad)?;
    Ok(rel_diff_real(closed.bound, numeric.bound))
}

/// Trapezoid grid used by callers that want the default numeric Schur set-up.
pub fn default_schur_quadrature() -> QuadratureSpec {
    QuadratureSpec::trapezoid(4001, 50.0, 1).expect("static spec is valid")
}
