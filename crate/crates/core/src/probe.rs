//! Operators applied to actual functions: kernel quadrature, Gaussian `L^p`
//! norms and ratio probes with the Gaussian trial family
//! `f_λ(x) = exp(λ|x|²/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{closed_form_bound, exp_zl_bound, sobolev_feasible};
use crate::cmath::{principal_powf, rel_diff_real};
use crate::error::{invalid, Error, Result};
use crate::func::Func;
use crate::plane_map::{ComplexTime, ExponentConfig, WeylParameter};
use crate::quadrature::{tensor_sum, QuadKind, QuadratureSpec};
use crate::report::{deserialize_f64, deserialize_f64_vec, serialize_f64, serialize_f64_vec};
use crate::spectral_oracle::{apply_resolvent, HermiteExpansion};
use crate::weyl_kernel::{
    kernel_of_gaussian_symbol, mehler_kernel, GaussianKernelForm, GaussianMeasure,
};

/// Relative change under node doubling above which a quadrature is rejected.
pub const DOUBLING_TOLERANCE: f64 = 1e-6;
/// Distance below the membership edge at which blow-up is reported.
pub const EDGE_OFFSET: f64 = 1e-3;
pub const DEFAULT_LAMBDA_POINTS: usize = 200;
const LAMBDA_FLOOR: f64 = -5.0;

const PROBE_POINTS: [f64; 4] = [-1.5, 0.0, 0.7, 2.0];

/// `∫ K(y, x) f(x) dx` at one point, with Gauss-Hermite nodes placed on the
/// real Gaussian part of the kernel in `x`. Also returns `∫ |K f| dx`, the
/// scale against which cancellation errors are judged.
fn kernel_quadrature(
    k: &GaussianKernelForm,
    f: &Func,
    rule: &[(f64, f64)],
    y: &[f64],
    want_scale: bool,
) -> (Complex64, f64) {
    let (a, c) = (k.coef_xx, k.coef_xy);
    let d = y.len();
    let y2: f64 = y.iter().map(|v| v * v).sum();
    let mean: Vec<f64> = y.iter().map(|v| c.re * v / (2.0 * a.re)).collect();
    let outer = k.prefactor
        * (-k.coef_yy * y2 + c.re * c.re * y2 / (4.0 * a.re)).exp()
        * (PI / a.re).powf(0.5 * d as f64);
    let mut x = vec![0.0; d];
    let mut scale = 0.0;
    let inner: Complex64 = tensor_sum(rule, d, &mut |offset: &[f64]| {
        let (mut x2, mut xy) = (0.0, 0.0);
        for j in 0..d {
            x[j] = mean[j] + offset[j];
            x2 += x[j] * x[j];
            xy += x[j] * y[j];
        }
        Complex64::new(0.0, -a.im * x2 + c.im * xy).exp() * f.eval(&x)
    });
    if want_scale {
        scale = tensor_sum(rule, d, &mut |offset: &[f64]| {
            for j in 0..d {
                x[j] = mean[j] + offset[j];
            }
            f.eval(&x).norm()
        });
    }
    (outer * inner, outer.norm() * scale)
}

/// `y ↦ ∫ K(y, x) f(x) dx`.
///
/// Convergence is checked once, at a few fixed points, by comparing with the
/// rule of twice as many nodes.
pub fn apply_kernel(kernel: &GaussianKernelForm, f: &Func, quad: &QuadratureSpec) -> Result<Func> {
    quad.validate()?;
    if quad.kind != QuadKind::GaussHermite {
        return Err(invalid(
            "quad",
            "kernel application uses Gauss-Hermite quadrature",
        ));
    }
    if kernel.dim != quad.dim {
        return Err(invalid("dim", "kernel and quadrature dimensions differ"));
    }
    if !(kernel.coef_xx.re > 0.0) {
        return Err(Error::NotIntegrable(format!(
            "kernel needs Re coef_xx > 0, got {}",
            kernel.coef_xx
        )));
    }
    let tau = 0.5 / kernel.coef_xx.re;
    let rule = quad.gaussian_rule(tau);
    let finer = quad.doubled().gaussian_rule(tau);
    for &t in &PROBE_POINTS {
        let y = vec![t; kernel.dim];
        let (coarse, _) = kernel_quadrature(kernel, f, &rule, &y, false);
        let (fine, scale) = kernel_quadrature(kernel, f, &finer, &y, true);
        if (coarse - fine).norm() > DOUBLING_TOLERANCE * fine.norm().max(scale) {
            return Err(Error::NonConvergence(format!(
                "kernel quadrature at y = {t}: {coarse} vs {fine} with doubled nodes"
            )));
        }
    }
    let k = *kernel;
    let f = f.clone();
    Ok(Func::new(move |y| {
        kernel_quadrature(&k, &f, &rule, y, false).0
    }))
}

fn lp_sum(f: &Func, p: f64, rule: &[(f64, f64)], dim: usize) -> f64 {
    tensor_sum(rule, dim, &mut |x: &[f64]| f.eval(x).norm().powf(p))
}

/// `(∫ |f|^p dγ_τ)^{1/p}`, checked against the doubled rule.
pub fn lp_norm(f: &Func, p: f64, measure: &GaussianMeasure, quad: &QuadratureSpec) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need p in [1, inf), got {p}")));
    }
    quad.validate()?;
    if measure.dim != quad.dim {
        return Err(invalid("dim", "measure and quadrature dimensions differ"));
    }
    let coarse = lp_sum(f, p, &quad.gaussian_rule(measure.tau), quad.dim);
    let fine = lp_sum(f, p, &quad.doubled().gaussian_rule(measure.tau), quad.dim);
    if rel_diff_real(coarse, fine) > DOUBLING_TOLERANCE {
        return Err(Error::NonConvergence(format!(
            "L^{p} norm: {coarse} vs {fine} with doubled nodes"
        )));
    }
    Ok(fine.powf(1.0 / p))
}

/// `f_λ(x) = exp(λ|x|²/2)` together with its norm in `L^p(γ_α)`, which is
/// finite exactly for `λ < 1/(αp)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialFunction {
    pub lam: f64,
    /// `(1 - pλα)^{-d/(2p)}`
    pub normalization: f64,
}

impl TrialFunction {
    pub fn new(lam: f64, p: f64, alpha: f64, d: usize) -> Result<Self> {
        let edge = 1.0 / (alpha * p);
        if !(lam < edge) || !lam.is_finite() {
            return Err(invalid(
                "lambda",
                format!("f_lambda is in L^{p}(gamma_{alpha}) only for lambda < {edge}, got {lam}"),
            ));
        }
        Ok(Self {
            lam,
            normalization: (1.0 - p * lam * alpha).powf(-0.5 * d as f64 / p),
        })
    }

    pub fn to_func(&self) -> Func {
        let lam = self.lam;
        Func::with_partial(
            move |x| Complex64::new((0.5 * lam * sq(x)).exp(), 0.0),
            move |x, j| Complex64::new(lam * x[j] * (0.5 * lam * sq(x)).exp(), 0.0),
        )
    }
}

fn sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// The operator whose ratios are probed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    /// `exp(-s(P² + Q²))`
    Weyl { s: Complex64 },
    /// `exp(-zL)`
    Semigroup { z: Complex64 },
}

impl OperatorSpec {
    fn kernel(&self) -> Result<GaussianKernelForm> {
        match *self {
            OperatorSpec::Weyl { s } => Ok(kernel_of_gaussian_symbol(&WeylParameter::new(s)?, 1)),
            OperatorSpec::Semigroup { z } => mehler_kernel(ComplexTime::new(z)?.z, 1),
        }
    }

    /// Closed-form bound and feasibility.
    fn bound(&self, cfg: &ExponentConfig) -> Result<(f64, bool)> {
        match *self {
            OperatorSpec::Weyl { s } => {
                let rep = closed_form_bound(&WeylParameter::new(s)?, cfg);
                Ok((rep.bound, rep.feasible))
            }
            OperatorSpec::Semigroup { z } => {
                let b = exp_zl_bound(ComplexTime::new(z)?, cfg)?;
                Ok((b.chained, b.schur.feasible))
            }
        }
    }
}

/// `‖T f_λ‖_{L^q(γ_β)}` in one dimension, in closed form.
///
/// With `K = P exp(-Ax² - By² + Cxy)` and `A' = A - λ/2`, the image is
/// `M exp(-G y²)` where `M = P (π/A')^{1/2}` and `G = B - C²/(4A')`. The
/// result is `+∞` when either Gaussian integral diverges.
pub fn image_norm(kernel: &GaussianKernelForm, lam: f64, q: f64, beta: f64) -> f64 {
    let a = kernel.coef_xx - 0.5 * lam;
    if !(a.re > 0.0) {
        return f64::INFINITY;
    }
    let m = kernel.prefactor * principal_powf(Complex64::new(PI, 0.0) / a, 0.5);
    let g = kernel.coef_yy - kernel.coef_xy * kernel.coef_xy / (4.0 * a);
    let spread = 1.0 + 2.0 * q * beta * g.re;
    if !(spread > 0.0) {
        return f64::INFINITY;
    }
    m.norm() * spread.powf(-0.5 / q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub operator: OperatorSpec,
    pub config: ExponentConfig,
    pub lambda_grid: Vec<f64>,
    #[serde(
        serialize_with = "serialize_f64_vec",
        deserialize_with = "deserialize_f64_vec"
    )]
    pub ratios: Vec<f64>,
    #[serde(serialize_with = "serialize_f64", deserialize_with = "deserialize_f64")]
    pub max_ratio: f64,
    pub argmax_lambda: f64,
    #[serde(serialize_with = "serialize_f64", deserialize_with = "deserialize_f64")]
    pub bound: f64,
    pub feasible: bool,
    #[serde(serialize_with = "serialize_f64", deserialize_with = "deserialize_f64")]
    pub ratio_at_zero: f64,
    /// Ratio at `λ = 1/(αp) - EDGE_OFFSET`.
    #[serde(serialize_with = "serialize_f64", deserialize_with = "deserialize_f64")]
    pub edge_ratio: f64,
    pub edge_offset: f64,
}

impl RatioReport {
    /// Whether the trial ratios exceed the closed-form bound anywhere.
    pub fn exceeds_bound(&self) -> bool {
        self.max_ratio > self.bound * (1.0 + 1e-12)
    }

    /// Whether the edge ratio is more than `factor` times the ratio at zero.
    pub fn blows_up(&self, factor: f64) -> bool {
        self.edge_ratio > factor * self.ratio_at_zero
    }
}

/// 200 points below the membership edge `1/(αp)`, log-spaced in the
/// distance to the edge from `1/(αp) + 5` down to `EDGE_OFFSET`, in
/// increasing order of `λ`. The point nearest to zero is moved to zero so
/// the constant function is always among the trials.
pub fn default_lambda_grid(cfg: &ExponentConfig) -> Vec<f64> {
    let edge = 1.0 / (cfg.alpha * cfg.p);
    let (far, near) = ((edge - LAMBDA_FLOOR).ln(), EDGE_OFFSET.ln());
    let n = DEFAULT_LAMBDA_POINTS;
    let mut grid: Vec<f64> = (0..n)
        .map(|k| edge - (far + (near - far) * k as f64 / (n - 1) as f64).exp())
        .collect();
    let nearest = (0..n)
        .min_by(|&i, &j| grid[i].abs().total_cmp(&grid[j].abs()))
        .expect("grid is not empty");
    grid[nearest] = 0.0;
    grid
}

fn ratio(kernel: &GaussianKernelForm, cfg: &ExponentConfig, lam: f64) -> Result<f64> {
    let trial = TrialFunction::new(lam, cfg.p, cfg.alpha, 1)?;
    Ok(image_norm(kernel, lam, cfg.q, cfg.beta) / trial.normalization)
}

/// Ratios `‖T f_λ‖_{L^q(γ_β)} / ‖f_λ‖_{L^p(γ_α)}` over `lam_grid`, computed
/// from closed-form Gaussian integrals; one-dimensional.
pub fn ratio_probe(
    op: OperatorSpec,
    cfg: &ExponentConfig,
    lam_grid: &[f64],
) -> Result<RatioReport> {
    if cfg.d != 1 {
        return Err(Error::Dimension {
            dim: cfg.d,
            reason: "ratio probes are one-dimensional",
        });
    }
    if lam_grid.is_empty() {
        return Err(invalid("lambda_grid", "empty grid"));
    }
    let kernel = op.kernel()?;
    let ratios = lam_grid
        .par_iter()
        .map(|&lam| ratio(&kernel, cfg, lam))
        .collect::<Result<Vec<f64>>>()?;
    let (mut max_ratio, mut argmax_lambda) = (f64::NEG_INFINITY, lam_grid[0]);
    for (&lam, &r) in lam_grid.iter().zip(&ratios) {
        if r > max_ratio {
            max_ratio = r;
            argmax_lambda = lam;
        }
    }
    let (bound, feasible) = op.bound(cfg)?;
    let edge = 1.0 / (cfg.alpha * cfg.p) - EDGE_OFFSET;
    Ok(RatioReport {
        operator: op,
        config: *cfg,
        lambda_grid: lam_grid.to_vec(),
        ratios,
        max_ratio,
        argmax_lambda,
        bound,
        feasible,
        ratio_at_zero: ratio(&kernel, cfg, 0.0)?,
        edge_ratio: ratio(&kernel, cfg, edge)?,
        edge_offset: EDGE_OFFSET,
    })
}

/// `‖(I + L)^{-1} f‖_{L²(γ)} / ‖f‖_{L^p(γ_{2/p})}`.
pub fn sobolev_probe(p: f64, f: &HermiteExpansion) -> Result<f64> {
    let (ok, _) = sobolev_feasible(p, f.dim);
    if !ok {
        return Err(invalid(
            "p",
            format!("need 2d/(d+2) < p <= 2 for d = {}, got {p}", f.dim),
        ));
    }
    let numerator = apply_resolvent(f).l2_norm();
    let measure = GaussianMeasure::new(2.0 / p, f.dim)?;
    let quad = QuadratureSpec::default_for_dim(f.dim);
    // below p = 1 the power |f|^p is not a norm but the integral is the same
    let denom = if p >= 1.0 {
        lp_norm(&f.to_func(), p, &measure, &quad)?
    } else {
        let g = f.to_func();
        let rule = quad.gaussian_rule(measure.tau);
        lp_sum(&g, p, &rule, f.dim).powf(1.0 / p)
    };
    Ok(numerator / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_oracle::hermite_basis;

    #[test]
    fn mehler_on_hermite() {
        let quad = QuadratureSpec::default_for_dim(1);
        let t = 0.5;
        let m = mehler_kernel(Complex64::new(t, 0.0), 1).unwrap();
        for n in 0..=10 {
            let h = Func::real(move |x| hermite_basis(n, x[0]).unwrap());
            let img = apply_kernel(&m, &h, &quad).unwrap();
            for &y in &[-2.0, 0.3, 1.7] {
                let expect = (-t * n as f64).exp() * hermite_basis(n, y).unwrap();
                assert!((img.eval(&[y]) - expect).norm() < 1e-10, "n = {n}, y = {y}");
            }
        }
    }

    #[test]
    fn rank_one_kernel_at_s_one() {
        // K = 2^{-1}(2π)^{-1/2} e^{-x²/2}: the image of f is ½∫f dγ
        let k = kernel_of_gaussian_symbol(&WeylParameter::real(1.0).unwrap(), 1);
        let f = Func::real(|x| 1.0 + x[0] + x[0] * x[0]);
        let img = apply_kernel(&k, &f, &QuadratureSpec::default_for_dim(1)).unwrap();
        for &y in &[-3.0, 0.0, 2.5] {
            assert!((img.eval(&[y]) - 1.0).norm() < 1e-13);
        }
        let zero = apply_kernel(&k, &Func::zero(), &QuadratureSpec::default_for_dim(1)).unwrap();
        assert_eq!(zero.eval(&[1.0]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lp_norm_values() {
        let quad = QuadratureSpec::default_for_dim(1);
        let g = GaussianMeasure::standard(1);
        let c = Func::real(|_| -3.0);
        assert!((lp_norm(&c, 1.7, &g, &quad).unwrap() - 3.0).abs() < 1e-13);
        let h1 = Func::real(|x| x[0]);
        assert!((lp_norm(&h1, 2.0, &g, &quad).unwrap() - 1.0).abs() < 1e-13);
        let trial = TrialFunction::new(0.3, 2.0, 1.0, 1).unwrap();
        let n = lp_norm(&trial.to_func(), 2.0, &g, &quad).unwrap();
        assert!((n - 0.4f64.powf(-0.25)).abs() < 1e-8, "{n}");
        assert!((trial.normalization - 0.4f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn trial_membership_is_strict() {
        assert!(TrialFunction::new(0.5, 2.0, 1.0, 1).is_err());
        assert!(TrialFunction::new(0.499, 2.0, 1.0, 1).is_ok());
    }

    #[test]
    fn image_norm_matches_quadrature() {
        let s = WeylParameter::new(Complex64::new(0.4, 0.2)).unwrap();
        let k = kernel_of_gaussian_symbol(&s, 1);
        let lam = 0.2;
        let f = TrialFunction::new(lam, 2.0, 1.0, 1).unwrap().to_func();
        let img = apply_kernel(&k, &f, &QuadratureSpec::default_for_dim(1)).unwrap();
        let beta = GaussianMeasure::new(0.8, 1).unwrap();
        let numeric = lp_norm(&img, 3.0, &beta, &QuadratureSpec::default_for_dim(1)).unwrap();
        let closed = image_norm(&k, lam, 3.0, 0.8);
        assert!(
            rel_diff_real(numeric, closed) < 1e-10,
            "{numeric} vs {closed}"
        );
    }

    #[test]
    fn ratio_probe_l2_half() {
        let c = ExponentConfig::standard(2.0, 2.0, 1).unwrap();
        let op = OperatorSpec::Weyl {
            s: Complex64::new(0.5, 0.0),
        };
        let rep = ratio_probe(op, &c, &default_lambda_grid(&c)).unwrap();
        assert!(rep.feasible);
        assert!(rep.ratio_at_zero <= rep.max_ratio);
        assert!(rep.max_ratio <= rep.bound);
        // trials cannot beat the spectral norm 2/3
        assert!(rep.max_ratio <= 2.0 / 3.0 + 1e-12);
        assert!(TrialFunction::new(0.6, 2.0, 1.0, 1).is_err());
        assert!(ratio_probe(op, &c, &[0.6]).is_err());
    }

    #[test]
    fn lambda_grid_shape() {
        let c = ExponentConfig::standard(2.0, 4.0, 1).unwrap();
        let g = default_lambda_grid(&c);
        assert_eq!(g.len(), 200);
        assert!((g[0] + 5.0).abs() < 1e-12);
        assert!((g[199] - (0.5 - 1e-3)).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sobolev_probe_fixtures() {
        let h0 = HermiteExpansion::basis(1, 4, &[0]).unwrap();
        assert!((sobolev_probe(1.5, &h0).unwrap() - 1.0).abs() < 1e-12);
        let h4 = HermiteExpansion::basis(1, 4, &[4]).unwrap();
        assert!((sobolev_probe(2.0, &h4).unwrap() - 0.2).abs() < 1e-12);
        assert!(sobolev_probe(0.5, &h0).is_err());
    }
}
