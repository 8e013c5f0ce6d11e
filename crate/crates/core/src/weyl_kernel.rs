//! Exact algebra of Gaussian integral kernels.
//!
//! Every kernel appearing here has the form
//! `K(y, x) = C · exp(-A|x|² - B|y|² + D x·y)` against Lebesgue measure, and
//! is stored as the expanded quadratic form rather than a completed square,
//! so identities between kernels reduce to comparing four complex numbers.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cmath::{expm1, principal_powf, rel_diff};
use crate::error::{invalid, Error, Result};
use crate::func::Func;
use crate::plane_map::{z_to_s, ComplexTime, WeylParameter};
use crate::quadrature::{trapezoid_rule, QuadKind, QuadratureSpec};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Centred Gaussian measure `γ_τ` on `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMeasure {
    pub tau: f64,
    pub dim: usize,
}

impl GaussianMeasure {
    pub fn new(tau: f64, dim: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid(
                "tau",
                format!("variance must be positive, got {tau}"),
            ));
        }
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        Ok(Self { tau, dim })
    }

    pub fn standard(dim: usize) -> Self {
        Self { tau: 1.0, dim }
    }

    /// `(2πτ)^{-d/2} exp(-|x|²/2τ)`
    pub fn density(&self, x: &[f64]) -> f64 {
        self.ln_density(x).exp()
    }

    pub fn ln_density(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        -0.5 * self.dim as f64 * (2.0 * PI * self.tau).ln() - r2 / (2.0 * self.tau)
    }
}

/// `K(y, x) = prefactor · exp(-coef_xx|x|² - coef_yy|y|² + coef_xy x·y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernelForm {
    pub prefactor: Complex64,
    pub coef_xx: Complex64,
    pub coef_yy: Complex64,
    pub coef_xy: Complex64,
    pub dim: usize,
}

impl GaussianKernelForm {
    pub fn eval(&self, y: &[f64], x: &[f64]) -> Complex64 {
        self.prefactor * self.exponent(y, x).exp()
    }

    /// `ln |K(y, x)|`, finite even where `K` underflows.
    pub fn ln_abs(&self, y: &[f64], x: &[f64]) -> f64 {
        self.prefactor.norm().ln() + self.exponent(y, x).re
    }

    fn exponent(&self, y: &[f64], x: &[f64]) -> Complex64 {
        let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
        for (a, b) in x.iter().zip(y) {
            xx += a * a;
            yy += b * b;
            xy += a * b;
        }
        -self.coef_xx * xx - self.coef_yy * yy + self.coef_xy * xy
    }

    /// Componentwise relative differences against `other`.
    pub fn diff(&self, other: &GaussianKernelForm) -> CoefficientDiff {
        CoefficientDiff {
            prefactor: rel_diff(self.prefactor, other.prefactor),
            coef_xx: rel_diff(self.coef_xx, other.coef_xx),
            coef_yy: rel_diff(self.coef_yy, other.coef_yy),
            coef_xy: rel_diff(self.coef_xy, other.coef_xy),
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            prefactor: self.prefactor * factor,
            ..*self
        }
    }
}

#[derive(Serialize, Deserialize)]
struct KernelJson {
    prefactor_re: f64,
    prefactor_im: f64,
    axx_re: f64,
    axx_im: f64,
    ayy_re: f64,
    ayy_im: f64,
    axy_re: f64,
    axy_im: f64,
    dim: usize,
}

impl Serialize for GaussianKernelForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        KernelJson {
            prefactor_re: self.prefactor.re,
            prefactor_im: self.prefactor.im,
            axx_re: self.coef_xx.re,
            axx_im: self.coef_xx.im,
            ayy_re: self.coef_yy.re,
            ayy_im: self.coef_yy.im,
            axy_re: self.coef_xy.re,
            axy_im: self.coef_xy.im,
            dim: self.dim,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GaussianKernelForm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = KernelJson::deserialize(deserializer)?;
        Ok(Self {
            prefactor: Complex64::new(j.prefactor_re, j.prefactor_im),
            coef_xx: Complex64::new(j.axx_re, j.axx_im),
            coef_yy: Complex64::new(j.ayy_re, j.ayy_im),
            coef_xy: Complex64::new(j.axy_re, j.axy_im),
            dim: j.dim,
        })
    }
}

/// Relative differences of the four coefficients of two kernel forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDiff {
    pub prefactor: f64,
    pub coef_xx: f64,
    pub coef_yy: f64,
    pub coef_xy: f64,
}

impl CoefficientDiff {
    pub fn max(&self) -> f64 {
        self.prefactor
            .max(self.coef_xx)
            .max(self.coef_yy)
            .max(self.coef_xy)
    }
}

/// `∫_{R^d} exp(-A|x|² + B x·y) dx = (π/A)^{d/2} exp(B²|y|²/(4A))`, with
/// `d = y.len()` and the principal branch of the power for complex `A`.
pub fn gaussian_integral(a: Complex64, b: Complex64, y: &[f64]) -> Result<Complex64> {
    if !(a.re > 0.0) {
        return Err(Error::NotIntegrable(format!(
            "Gaussian integral needs Re A > 0, got {a}"
        )));
    }
    let d = y.len() as f64;
    let y2: f64 = y.iter().map(|v| v * v).sum();
    Ok(principal_powf(Complex64::new(PI, 0.0) / a, 0.5 * d) * (b * b * y2 / (4.0 * a)).exp())
}

pub fn gaussian_integral_real(a: f64, b: f64, y: &[f64]) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::NotIntegrable(format!(
            "Gaussian integral needs A > 0, got {a}"
        )));
    }
    let d = y.len() as f64;
    let y2: f64 = y.iter().map(|v| v * v).sum();
    Ok((PI / a).powf(0.5 * d) * (b * b * y2 / (4.0 * a)).exp())
}

/// Kernel of `exp(-s(P² + Q²))` against Lebesgue measure:
/// prefactor `2^{-d}(2πs)^{-d/2}`, `coef_xx = b_s + ½`, `coef_yy = b_s`,
/// `coef_xy = c_s`.
pub fn kernel_of_gaussian_symbol(s: &WeylParameter, dim: usize) -> GaussianKernelForm {
    let d = dim as f64;
    let prefactor = 2f64.powf(-d) * principal_powf(2.0 * PI * s.s, -0.5 * d);
    GaussianKernelForm {
        prefactor,
        coef_xx: s.b_s + 0.5,
        coef_yy: s.b_s,
        coef_xy: s.c_s,
        dim,
    }
}

/// The Mehler kernel
/// `M_t(y, x) = (2π(1 - e^{-2t}))^{-d/2} exp(-|e^{-t}y - x|² / (2(1 - e^{-2t})))`
/// expanded as a quadratic form; complex `t` with `Re t > 0` is the analytic
/// continuation.
pub fn mehler_kernel(t: Complex64, dim: usize) -> Result<GaussianKernelForm> {
    if !(t.re > 0.0) {
        return Err(Error::Domain(format!(
            "Mehler kernel needs Re t > 0, got {t}"
        )));
    }
    let e1 = (-t).exp();
    let e2 = e1 * e1;
    let denom = -expm1(-2.0 * t);
    if denom == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain(format!("e^(-2t) = 1 at t = {t}")));
    }
    let d = dim as f64;
    let prefactor = (2.0 * PI).powf(-0.5 * d) * principal_powf(denom, -0.5 * d);
    Ok(GaussianKernelForm {
        prefactor,
        coef_xx: 0.5 / denom,
        coef_yy: 0.5 * e2 / denom,
        coef_xy: e1 / denom,
        dim,
    })
}

/// Compares `(1 + s)^d K_{a_s}` with `M_t` at `s = (1 - e^{-t})/(1 + e^{-t})`,
/// coefficient by coefficient.
pub fn kernel_identity_diff(t: Complex64, dim: usize) -> Result<CoefficientDiff> {
    let s = z_to_s(ComplexTime::new(t)?)?;
    let weyl = kernel_of_gaussian_symbol(&s, dim).scaled((ONE + s.s).powu(dim as u32));
    let mehler = mehler_kernel(t, dim)?;
    Ok(weyl.diff(&mehler))
}

/// `(K₁ ∘ K₂)(y, x) = ∫ K₁(y, w) K₂(w, x) dw`, in closed form.
pub fn compose_kernels(
    outer: &GaussianKernelForm,
    inner: &GaussianKernelForm,
) -> Result<GaussianKernelForm> {
    if outer.dim != inner.dim {
        return Err(invalid("dim", "kernels of different dimension"));
    }
    let a = outer.coef_xx + inner.coef_yy;
    if !(a.re > 0.0) {
        return Err(Error::NotIntegrable(format!(
            "composition needs Re(A) > 0 in the middle variable, got {a}"
        )));
    }
    // ∫ exp(-a|w|² + (D₁y + D₂x)·w) dw = (π/a)^{d/2} exp(|D₁y + D₂x|²/(4a))
    let d = outer.dim as f64;
    let norm = principal_powf(Complex64::new(PI, 0.0) / a, 0.5 * d);
    Ok(GaussianKernelForm {
        prefactor: outer.prefactor * inner.prefactor * norm,
        coef_xx: inner.coef_xx - inner.coef_xy * inner.coef_xy / (4.0 * a),
        coef_yy: outer.coef_yy - outer.coef_xy * outer.coef_xy / (4.0 * a),
        coef_xy: outer.coef_xy * inner.coef_xy / (2.0 * a),
        dim: outer.dim,
    })
}

type SymbolFn = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

/// A phase-space symbol `a(x, ξ)` in one dimension with a Gaussian decay
/// rate in `ξ`, used to size the quadrature window.
#[derive(Clone)]
pub struct SymbolFunction {
    evaluator: Arc<SymbolFn>,
    pub decay_hint: f64,
    pub dim: usize,
}

impl std::fmt::Debug for SymbolFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolFunction")
            .field("decay_hint", &self.decay_hint)
            .field("dim", &self.dim)
            .finish()
    }
}

impl SymbolFunction {
    pub fn new(
        decay_hint: f64,
        a: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::with_dim(1, decay_hint, a)
    }

    pub fn with_dim(
        dim: usize,
        decay_hint: f64,
        a: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(decay_hint > 0.0 && decay_hint.is_finite()) {
            return Err(invalid("decay_hint", "must be positive"));
        }
        Ok(Self {
            evaluator: Arc::new(a),
            decay_hint,
            dim,
        })
    }

    /// `a_s(x, ξ) = exp(-s(x² + ξ²))`.
    pub fn gaussian(s: Complex64) -> Result<Self> {
        if !(s.re > 0.0) {
            return Err(Error::Domain(format!(
                "Gaussian symbol needs Re s > 0, got {s}"
            )));
        }
        Self::new(s.re, move |x, xi| (-s * (x * x + xi * xi)).exp())
    }

    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        (self.evaluator)(x, xi)
    }
}

/// Tolerance above which the estimated truncation error is reported.
pub const SYMBOL_TRUNCATION_TOL: f64 = 1e-8;

/// Pointwise evaluator of the kernel of `a(Q, P)`,
/// `K_a(y, x) = (2√2π)^{-1} e^{(y² - x²)/4} ∫ a((x+y)/(2√2), ξ) e^{-iξ(x-y)/√2} dξ`,
/// with the `ξ`-integral done by the trapezoid rule.
#[derive(Debug, Clone)]
pub struct SymbolKernel {
    symbol: SymbolFunction,
    rule: Vec<(f64, f64)>,
    pub window: f64,
    pub nodes: usize,
    /// `exp(-decay · R²)`, the size of the symbol at the truncation radius.
    pub truncation_estimate: f64,
}

impl SymbolKernel {
    pub fn eval(&self, y: f64, x: f64) -> Complex64 {
        let centre = (x + y) / (2.0 * SQRT_2);
        let shift = (x - y) / SQRT_2;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(xi, w) in &self.rule {
            let phase = Complex64::from_polar(1.0, -xi * shift);
            acc += self.symbol.eval(centre, xi) * phase * w;
        }
        let pre = ((y * y - x * x) / 4.0).exp() / (2.0 * SQRT_2 * PI);
        acc * pre
    }

    pub fn exceeds_tolerance(&self) -> bool {
        self.truncation_estimate > SYMBOL_TRUNCATION_TOL
    }
}

/// Default truncation radius `max(8, 6/√decay)` and `2^12` nodes.
pub fn default_symbol_grid(decay_hint: f64) -> QuadratureSpec {
    QuadratureSpec {
        kind: QuadKind::Trapezoid,
        nodes: 1 << 12,
        window: 8f64.max(6.0 / decay_hint.sqrt()),
        dim: 1,
    }
}

pub fn kernel_of_general_symbol(
    a: &SymbolFunction,
    grid: Option<QuadratureSpec>,
) -> Result<SymbolKernel> {
    if a.dim != 1 {
        return Err(Error::Dimension {
            dim: a.dim,
            reason: "general symbols are supported in one dimension only",
        });
    }
    let grid = grid.unwrap_or_else(|| default_symbol_grid(a.decay_hint));
    if grid.kind != QuadKind::Trapezoid {
        return Err(invalid("grid", "symbol quadrature uses the trapezoid rule"));
    }
    grid.validate()?;
    let truncation_estimate = (-a.decay_hint * grid.window * grid.window).exp();
    if truncation_estimate > SYMBOL_TRUNCATION_TOL {
        log::warn!(
            "symbol quadrature window {} leaves truncation error ~{truncation_estimate:.1e}",
            grid.window
        );
    }
    Ok(SymbolKernel {
        symbol: a.clone(),
        rule: trapezoid_rule(-grid.window, grid.window, grid.nodes),
        window: grid.window,
        nodes: grid.nodes,
        truncation_estimate,
    })
}

/// `exp(i(u·X + v·D)) f(y) = exp(i u·y + ½ i u·v) f(y + v)`.
pub fn weyl_translate(u: &[f64], v: &[f64], f: &Func) -> Result<Func> {
    if u.len() != v.len() {
        return Err(invalid("u,v", "translation vectors differ in length"));
    }
    let (u, v, f) = (u.to_vec(), v.to_vec(), f.clone());
    let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
    Ok(Func::new(move |y| {
        let uy: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
        let shifted: Vec<f64> = y.iter().zip(&v).map(|(a, b)| a + b).collect();
        Complex64::from_polar(1.0, uy + 0.5 * uv) * f.eval(&shifted)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gaussian_integral_hand_values() {
        let v = gaussian_integral_real(1.0, 0.0, &[3.7]).unwrap();
        assert_relative_eq!(v, PI.sqrt(), max_relative = 1e-15);
        let v = gaussian_integral_real(0.5, 1.0, &[1.0]).unwrap();
        assert_relative_eq!(v, (2.0 * PI).sqrt() * 0.5f64.exp(), max_relative = 1e-15);
        assert!(gaussian_integral_real(0.0, 1.0, &[1.0]).is_err());
        assert!(gaussian_integral(c(-1.0, 2.0), c(1.0, 0.0), &[1.0]).is_err());
    }

    #[test]
    fn gaussian_integral_against_trapezoid() {
        let rule = trapezoid_rule(-20.0, 20.0, 10_000);
        for &a in &[0.5, 1.0, 2.0] {
            for &b in &[-1.0, 0.0, 1.0] {
                let y = 0.8;
                let quad: f64 = rule
                    .iter()
                    .map(|&(x, w)| w * (-a * x * x + b * x * y).exp())
                    .sum();
                let exact = gaussian_integral_real(a, b, &[y]).unwrap();
                assert!(
                    (quad - exact).abs() < 1e-10,
                    "a={a} b={b}: {quad} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn symbol_kernel_at_one_is_rank_one() {
        let k = kernel_of_gaussian_symbol(&WeylParameter::real(1.0).unwrap(), 2);
        assert_eq!(k.coef_yy, c(0.0, 0.0));
        assert_eq!(k.coef_xy, c(0.0, 0.0));
        assert_eq!(k.coef_xx, c(0.5, 0.0));
        assert_relative_eq!(k.prefactor.re, 0.25 / (2.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn symbol_kernel_at_one_half() {
        let k = kernel_of_gaussian_symbol(&WeylParameter::real(0.5).unwrap(), 1);
        assert!((k.coef_yy - c(1.0 / 16.0, 0.0)).norm() < 1e-16);
        assert!((k.coef_xy - c(3.0 / 8.0, 0.0)).norm() < 1e-16);
        assert!((k.prefactor - c(0.5 / PI.sqrt(), 0.0)).norm() < 1e-16);
    }

    #[test]
    fn mehler_at_ln3() {
        let m = mehler_kernel(c(3f64.ln(), 0.0), 1).unwrap();
        assert!((m.coef_xx - c(9.0 / 16.0, 0.0)).norm() < 1e-15);
        assert!((m.coef_yy - c(1.0 / 16.0, 0.0)).norm() < 1e-15);
        assert!((m.coef_xy - c(3.0 / 8.0, 0.0)).norm() < 1e-15);
        let pre = (2.0 * PI).powf(-0.5) * (9.0f64 / 8.0).sqrt();
        assert!((m.prefactor - c(pre, 0.0)).norm() < 1e-15);
        assert!((pre - 0.75 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mehler_rejects_non_positive_time() {
        assert!(mehler_kernel(c(0.0, 1.0), 1).is_err());
        assert!(mehler_kernel(c(-1.0, 0.0), 1).is_err());
    }

    #[test]
    fn mehler_long_time_is_stationary() {
        let m = mehler_kernel(c(50.0, 0.0), 3).unwrap();
        assert!((m.coef_xx - c(0.5, 0.0)).norm() < 1e-15);
        assert!(m.coef_yy.norm() < 1e-40);
        assert!(m.coef_xy.norm() < 1e-20);
        assert_relative_eq!(m.prefactor.re, (2.0 * PI).powf(-1.5), max_relative = 1e-15);
    }

    #[test]
    fn kernel_identity_at_ln3() {
        let diff = kernel_identity_diff(c(3f64.ln(), 0.0), 1).unwrap();
        assert!(diff.max() < 1e-15, "{diff:?}");
    }

    #[test]
    fn composition_of_mehler_kernels() {
        for &t1 in &[0.1, 0.5, 1.0] {
            for &t2 in &[0.1, 0.5, 1.0] {
                let k = compose_kernels(
                    &mehler_kernel(c(t1, 0.0), 2).unwrap(),
                    &mehler_kernel(c(t2, 0.0), 2).unwrap(),
                )
                .unwrap();
                let direct = mehler_kernel(c(t1 + t2, 0.0), 2).unwrap();
                assert!(
                    k.diff(&direct).max() < 1e-10,
                    "{t1},{t2}: {:?}",
                    k.diff(&direct)
                );
            }
        }
    }

    #[test]
    fn weyl_kernel_is_symmetric_against_gamma_and_positive() {
        for &s in &[0.1, 0.5, 1.0, 3.0] {
            let k = kernel_of_gaussian_symbol(&WeylParameter::real(s).unwrap(), 1);
            assert!((k.coef_xx - 0.5 - k.coef_yy).norm() < 1e-15);
            for &(y, x) in &[(0.0, 0.0), (3.0, -4.0), (-7.0, 2.0)] {
                assert!(k.eval(&[y], &[x]).re > 0.0);
                assert_eq!(k.eval(&[y], &[x]).im, 0.0);
            }
        }
    }

    #[test]
    fn json_field_names() {
        let k = mehler_kernel(c(1.0, 0.5), 1).unwrap();
        let json = serde_json::to_value(k).unwrap();
        for key in [
            "prefactor_re",
            "prefactor_im",
            "axx_re",
            "axx_im",
            "ayy_re",
            "ayy_im",
            "axy_re",
            "axy_im",
            "dim",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let back: GaussianKernelForm = serde_json::from_value(json).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn general_symbol_requires_one_dimension() {
        let a = SymbolFunction::with_dim(2, 1.0, |_, _| c(1.0, 0.0)).unwrap();
        assert!(matches!(
            kernel_of_general_symbol(&a, None),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn narrow_window_is_flagged() {
        let a = SymbolFunction::gaussian(c(0.5, 0.0)).unwrap();
        let grid = QuadratureSpec::trapezoid(512, 2.0, 1).unwrap();
        let k = kernel_of_general_symbol(&a, Some(grid)).unwrap();
        assert!(k.exceeds_tolerance());
        let k = kernel_of_general_symbol(&a, None).unwrap();
        assert!(!k.exceeds_tolerance());
    }

    #[test]
    fn translation_identity() {
        let f = Func::real(|y| (-y[0] * y[0]).exp() + y[0]);
        let g = weyl_translate(&[0.0], &[0.0], &f).unwrap();
        for &y in &[-1.0, 0.0, 0.3, 2.0] {
            assert_eq!(g.eval(&[y]), f.eval(&[y]));
        }
    }
}
