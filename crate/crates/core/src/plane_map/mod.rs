//! Complex-plane geometry of the time change
//! `s = (1 - e^{-z}) / (1 + e^{-z})`.
//!
//! The map sends the strip `{Re z > 0, |Im z| < π}` bi-holomorphically onto
//! `{Re s > 0} \ [1, ∞)`. Under it the Epperson region `E_p` becomes the open
//! sector `Σ_{θ_p}` with `cos θ_p = |2/p - 1|`, which is what makes the
//! boundedness criteria below tractable.

mod region;

pub use region::{sample_region, sample_region_with_margin, Region, RegionSample, Window};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmath::expm1;
use crate::error::{invalid, Error, Result};

/// Relative rounding allowance for the non-strict quadratic condition of the
/// main feasibility test, measured against the size of the factors before
/// cancellation.
pub const QUADRATIC_ROUNDING: f64 = 1e-12;

/// A point `z` of the semigroup time plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexTime {
    pub z: Complex64,
}

impl ComplexTime {
    /// Time admissible for operator-valued use: `Re z > 0`.
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re > 0.0) || !z.im.is_finite() {
            return Err(Error::Domain(format!(
                "operator time needs Re z > 0, got {z}"
            )));
        }
        Ok(Self { z })
    }

    pub fn real(t: f64) -> Result<Self> {
        Self::new(Complex64::new(t, 0.0))
    }

    /// Time admissible for region membership queries: `Re z >= 0`.
    pub fn for_region(z: Complex64) -> Result<Self> {
        if !(z.re >= 0.0) {
            return Err(Error::Domain(format!(
                "region query needs Re z >= 0, got {z}"
            )));
        }
        Ok(Self { z })
    }
}

/// `s` with `Re s > 0` together with the scalars used by the kernel and the
/// boundedness criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylParameter {
    pub s: Complex64,
    /// `½ Re(1/s + s)`
    pub r_plus: f64,
    /// `½ Re(1/s - s)`
    pub r_minus: f64,
    /// `(1 - s)² / (8s)`
    pub b_s: Complex64,
    /// `¼ (1/s - s)`
    pub c_s: Complex64,
}

impl WeylParameter {
    pub fn new(s: Complex64) -> Result<Self> {
        if !(s.re > 0.0) || !s.im.is_finite() || !s.re.is_finite() {
            return Err(Error::Domain(format!(
                "Weyl parameter needs Re s > 0, got {s}"
            )));
        }
        let inv = s.inv();
        let r_plus = 0.5 * (inv + s).re;
        let r_minus = 0.5 * (inv - s).re;
        let one_minus = Complex64::new(1.0, 0.0) - s;
        let b_s = one_minus * one_minus / (8.0 * s);
        let c_s = 0.25 * (inv - s);
        debug_assert!(r_plus > 0.0);
        Ok(Self {
            s,
            r_plus,
            r_minus,
            b_s,
            c_s,
        })
    }

    pub fn real(s: f64) -> Result<Self> {
        Self::new(Complex64::new(s, 0.0))
    }
}

/// The exponent data `(p, q, α, β, d)` of a restricted boundedness question,
/// with `1/r = 1 - (1/p - 1/q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub d: usize,
    pub r: f64,
}

impl ExponentConfig {
    pub fn new(p: f64, q: f64, alpha: f64, beta: f64, d: usize) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(invalid("p", format!("need p in [1, inf), got {p}")));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(invalid("q", format!("need q in [1, inf), got {q}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("need alpha > 0, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("need beta > 0, got {beta}")));
        }
        if d == 0 {
            return Err(invalid("d", "dimension must be positive"));
        }
        let gap = 1.0 / p - 1.0 / q;
        if !(gap < 1.0) {
            return Err(invalid("p,q", "need 1/p - 1/q < 1"));
        }
        Ok(Self {
            p,
            q,
            alpha,
            beta,
            d,
            r: 1.0 / (1.0 - gap),
        })
    }

    /// The Gaussian `L^p(γ) → L^q(γ)` setting `α = β = 1`.
    pub fn standard(p: f64, q: f64, d: usize) -> Result<Self> {
        Self::new(p, q, 1.0, 1.0, d)
    }

    /// `θ_p` for the source exponent.
    pub fn theta_p(&self) -> f64 {
        theta_p(self.p)
    }
}

/// `θ_p = arccos|2/p - 1|`; zero at `p = 1`, maximal `π/2` at `p = 2`.
pub fn theta_p(p: f64) -> f64 {
    (2.0 / p - 1.0).abs().min(1.0).acos()
}

/// `tan θ_p`, or `None` when `θ_p = π/2` (at `p = 2`).
fn tan_theta_p(p: f64) -> Option<f64> {
    let c = (2.0 / p - 1.0).abs().min(1.0);
    if c == 0.0 {
        None
    } else {
        Some((1.0 - c * c).sqrt() / c)
    }
}

/// `s = (1 - e^{-z}) / (1 + e^{-z})`, i.e. `tanh(z/2)`.
pub fn z_to_s(z: ComplexTime) -> Result<WeylParameter> {
    let z = z.z;
    if !(z.re > 0.0) {
        return Err(Error::Domain(format!("z_to_s needs Re z > 0, got {z}")));
    }
    let omega = (-z).exp();
    let denom = Complex64::new(1.0, 0.0) + omega;
    assert!(
        denom != Complex64::new(0.0, 0.0),
        "e^(-z) = -1 with Re z > 0"
    );
    // 1 - e^{-z} without cancellation near z = 0
    let s = -expm1(-z) / denom;
    let w = WeylParameter::new(s)?;
    assert!(w.s.re > 0.0);
    Ok(w)
}

/// Inverse of [`z_to_s`] onto the strip `{Re z > 0, |Im z| < π}`:
/// `z = Log((1 + s) / (1 - s))`.
pub fn s_to_z(s: &WeylParameter) -> Result<ComplexTime> {
    let s = s.s;
    if s.im == 0.0 && s.re >= 1.0 {
        return Err(Error::BranchCut { re: s.re, im: s.im });
    }
    let one = Complex64::new(1.0, 0.0);
    let z = ((one + s) / (one - s)).ln();
    ComplexTime::new(z)
}

/// Membership in the open sector `Σ_θ = {s ≠ 0 : |arg s| < θ}`.
pub fn in_sector(s: Complex64, theta: f64) -> bool {
    in_sector_with_margin(s, theta, 0.0)
}

/// [`in_sector`] with the opening enlarged by `eps` (for plotting).
pub fn in_sector_with_margin(s: Complex64, theta: f64, eps: f64) -> bool {
    s != Complex64::new(0.0, 0.0) && s.arg().abs() < theta + eps
}

/// Membership in the Epperson region `E_p = {|sin y| < tan(θ_p) sinh x}`.
///
/// At `p = 2` the region is the half plane `x > 0`.
pub fn in_epperson(z: Complex64, p: f64) -> bool {
    in_epperson_with_margin(z, p, 0.0)
}

pub fn in_epperson_with_margin(z: Complex64, p: f64, eps: f64) -> bool {
    let (x, y) = (z.re, z.im);
    match tan_theta_p(p) {
        None => x > -eps,
        Some(t) => y.sin().abs() < t * x.sinh() + eps,
    }
}

/// Membership in `E_{p,q}` for `1 < p ≤ q < ∞`, with `ω = e^{-z}`:
/// `|ω|² < p/q` and
/// `(q-1)|ω|⁴ + (2-p-q)(Re ω)² - (2-p-q+pq)(Im ω)² + p - 1 > 0`.
pub fn in_epq(z: Complex64, p: f64, q: f64) -> Result<bool> {
    if !(p > 1.0) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    if p > q {
        return Err(invalid("p,q", format!("need p <= q, got p = {p}, q = {q}")));
    }
    if !(z.re > 0.0) {
        return Ok(false);
    }
    let omega = (-z).exp();
    let m2 = omega.norm_sqr();
    if !(m2 < p / q) {
        return Ok(false);
    }
    Ok(epq_quartic(omega, p, q) > 0.0)
}

/// `(q-1)|ω|⁴ + (2-p-q)(Re ω)² - (2-p-q+pq)(Im ω)² + p - 1`.
pub fn epq_quartic(omega: Complex64, p: f64, q: f64) -> f64 {
    let m2 = omega.norm_sqr();
    (q - 1.0) * m2 * m2 + (2.0 - p - q) * omega.re * omega.re
        - (2.0 - p - q + p * q) * omega.im * omega.im
        + p
        - 1.0
}

/// The three quantities entering the main boundedness criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    /// `1 - 2/(αp) + r₊`
    pub source_margin: f64,
    /// `2/(βq) - 1 + r₊`
    pub target_margin: f64,
    /// `(source_margin)(target_margin) - r₋²`
    pub quadratic_gap: f64,
    pub feasible: bool,
}

pub fn feasibility(s: &WeylParameter, cfg: &ExponentConfig) -> Feasibility {
    let a = 2.0 / (cfg.alpha * cfg.p);
    let b = 2.0 / (cfg.beta * cfg.q);
    let source_margin = 1.0 - a + s.r_plus;
    let target_margin = b - 1.0 + s.r_plus;
    let product = source_margin * target_margin;
    let rm2 = s.r_minus * s.r_minus;
    let quadratic_gap = product - rm2;
    let allowance = QUADRATIC_ROUNDING * (1.0 + a + s.r_plus) * (1.0 + b + s.r_plus);
    let feasible = source_margin > 0.0 && target_margin > 0.0 && quadratic_gap >= -allowance;
    Feasibility {
        source_margin,
        target_margin,
        quadratic_gap,
        feasible,
    }
}

/// The sufficient condition for `L^p(γ_α) → L^q(γ_β)` boundedness of
/// `exp(-s(P² + Q²))`: both margins strictly positive and
/// `r₋² ≤ (1 - 2/(αp) + r₊)(2/(βq) - 1 + r₊)`.
pub fn theorem_main_feasible(s: &WeylParameter, cfg: &ExponentConfig) -> bool {
    feasibility(s, cfg).feasible
}

/// Membership in `R_p = {s : 1 - 2/p + r₊(s) > 0}` (requires `Re s > 0`).
pub fn in_rp(s: Complex64, p: f64) -> bool {
    if !(s.re > 0.0) {
        return false;
    }
    let r_plus = 0.5 * (s.inv() + s).re;
    1.0 - 2.0 / p + r_plus > 0.0
}

/// Values of the three equivalent forms of the `p ≠ q` quadratic condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `(p-q)x(1+x²+y²) + pqx² - (pq-2p-2q+4)(x²+y²)`
    pub cubic: f64,
    /// The rational form of the condition multiplied through by `x² + y²`.
    pub rational_scaled: f64,
    /// The `e^{-z}` quartic at `e^{-z} = (1-s)/(1+s)`, times
    /// `((1+x)² + y²)⁴ / (4((1+x)² + y²)²)`.
    pub quartic_scaled: f64,
    /// The same quartic expanded as a polynomial in `(x, y)` and divided by
    /// `4((1+x)² + y²)²`.
    pub polynomial_scaled: f64,
    /// Size of the largest individual term of `cubic`; differences are
    /// measured relative to it.
    pub scale: f64,
    pub diff_rational: f64,
    pub diff_quartic: f64,
    pub diff_polynomial: f64,
}

impl IdentityReport {
    pub fn max_diff(&self) -> f64 {
        self.diff_rational
            .max(self.diff_quartic)
            .max(self.diff_polynomial)
    }
}

/// Evaluates the condition for `s = x + iy` in its rational, cubic and
/// `e^{-z}`-quartic forms, which are algebraically identical up to the
/// positive factors removed here.
pub fn check_pq_identities(x: f64, y: f64, p: f64, q: f64) -> Result<IdentityReport> {
    if !(x > 0.0) {
        return Err(invalid("x", format!("need x > 0, got {x}")));
    }
    let rho2 = x * x + y * y;
    let k = p * q - 2.0 * p - 2.0 * q + 4.0;
    let t1 = (p - q) * x * (1.0 + rho2);
    let t2 = p * q * x * x;
    let t3 = k * rho2;
    let cubic = t1 + t2 - t3;
    let scale = t1.abs().max(t2.abs()).max(t3.abs()).max(f64::MIN_POSITIVE);

    let rational =
        (p - q) * (x + x / rho2) + p * q * (x * x / rho2 - 1.0) + 2.0 * p + 2.0 * q - 4.0;
    let rational_scaled = rational * rho2;

    let s = Complex64::new(x, y);
    let one = Complex64::new(1.0, 0.0);
    let omega = (one - s) / (one + s);
    let dd = (1.0 + x) * (1.0 + x) + y * y;
    let quartic_scaled = epq_quartic(omega, p, q) * dd * dd / 4.0;

    let a = 1.0 - rho2;
    let poly = (q - 1.0) * (a * a + 4.0 * y * y).powi(2) + (2.0 - p - q) * a * a * dd * dd
        - (2.0 - p - q + p * q) * 4.0 * y * y * dd * dd
        + (p - 1.0) * dd.powi(4);
    let polynomial_scaled = poly / (4.0 * dd * dd);

    Ok(IdentityReport {
        cubic,
        rational_scaled,
        quartic_scaled,
        polynomial_scaled,
        scale,
        diff_rational: (cubic - rational_scaled).abs() / scale,
        diff_quartic: (cubic - quartic_scaled).abs() / scale,
        diff_polynomial: (cubic - polynomial_scaled).abs() / scale,
    })
}
