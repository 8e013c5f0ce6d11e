//! One-variable polynomials with complex coefficients, used for the exact
//! Wiener-Plancherel transform and the position/momentum swap relations.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const MAX_POLY_DEGREE: usize = 60;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `Σ_k coeffs[k] y^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        let p = Self { coeffs }.trimmed();
        if p.degree() > MAX_POLY_DEGREE {
            return Err(invalid(
                "polynomial",
                format!("degree {} exceeds {MAX_POLY_DEGREE}", p.degree()),
            ));
        }
        Ok(p)
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![ZERO] }
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last() == Some(&ZERO) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(ZERO);
        }
        self
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The monic probabilists' Hermite polynomial `He_n`, whose coefficients
    /// are integers.
    pub fn hermite_he(n: usize) -> Result<Self> {
        if n > MAX_POLY_DEGREE {
            return Err(invalid(
                "n",
                format!("degree {n} exceeds {MAX_POLY_DEGREE}"),
            ));
        }
        let mut prev = vec![1.0];
        let mut cur = vec![0.0, 1.0];
        if n == 0 {
            return Self::from_real(&prev);
        }
        // He_{k+1} = y He_k - k He_{k-1}
        for k in 1..n {
            let mut next = vec![0.0; k + 2];
            for (j, &c) in cur.iter().enumerate() {
                next[j + 1] += c;
            }
            for (j, &c) in prev.iter().enumerate() {
                next[j] -= k as f64 * c;
            }
            prev = std::mem::replace(&mut cur, next);
        }
        Self::from_real(&cur)
    }

    /// `h_n = He_n / √(n!)`, orthonormal in `L²(γ)`.
    pub fn hermite(n: usize) -> Result<Self> {
        Ok(Self::hermite_he(n)?.scale(Complex64::new(1.0 / factorial(n).sqrt(), 0.0)))
    }

    /// `Σ_n c_n h_n`.
    pub fn from_hermite(c: &[Complex64]) -> Result<Self> {
        let mut acc = Self::zero();
        for (n, &cn) in c.iter().enumerate() {
            acc = acc.add(&Self::hermite(n)?.scale(cn));
        }
        Ok(acc)
    }

    /// Coefficients in the orthonormal basis `h_n`, by peeling off leading
    /// terms.
    pub fn to_hermite(&self) -> Vec<Complex64> {
        let mut rest = self.clone();
        let mut out = vec![ZERO; self.coeffs.len()];
        for n in (0..self.coeffs.len()).rev() {
            let lead = rest.coeffs.get(n).copied().unwrap_or(ZERO);
            if lead != ZERO {
                let he = Self::hermite_he(n).expect("degree bounded by self");
                rest = rest.sub(&he.scale(lead));
            }
            out[n] = lead * factorial(n).sqrt();
        }
        out
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * y + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        }
        .trimmed()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(ZERO)
                    + other.coeffs.get(k).copied().unwrap_or(ZERO)
            })
            .collect();
        Self { coeffs }.trimmed()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
        .trimmed()
    }

    /// `y · f`.
    pub fn times_y(&self) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(ZERO);
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs)
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut b = 1.0;
    for j in 0..k {
        b = b * (n - j) as f64 / (j + 1) as f64;
    }
    b.round()
}

/// `(-i)^m`, exactly.
fn minus_i_pow(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => -I,
        2 => Complex64::new(-1.0, 0.0),
        _ => I,
    }
}

/// `W f(y) = ∫ f(-iy + √2 x) dγ(x)`, from the moments `E x^j = (j-1)!!` of
/// even order.
///
/// Each monomial `y^k` maps to `Σ_{j even} C(k,j) (-i)^{k-j} 2^{j/2} (j-1)!! y^{k-j}`,
/// so integer-coefficient input stays in exact integer arithmetic while the
/// numbers fit in a double.
pub fn wiener_plancherel(f: &Polynomial) -> Polynomial {
    let mut out = vec![ZERO; f.coeffs.len()];
    for (k, &c) in f.coeffs.iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let mut double_fact = 1.0;
        for j in (0..=k).step_by(2) {
            if j > 0 {
                double_fact *= (j - 1) as f64;
            }
            let weight = binomial(k, j) * 2f64.powi((j / 2) as i32) * double_fact;
            out[k - j] += c * minus_i_pow(k - j) * weight;
        }
    }
    Polynomial { coeffs: out }.trimmed()
}

/// `q f = (y/√2) f`.
pub fn position_poly(f: &Polynomial) -> Result<Polynomial> {
    Ok(f.times_y()?.scale(Complex64::new(1.0 / SQRT_2, 0.0)))
}

/// `p f = (1/i)(√2 f' - (y/√2) f)`, with the exact derivative.
pub fn momentum_poly(f: &Polynomial) -> Result<Polynomial> {
    let inner = f
        .derivative()
        .scale(Complex64::new(SQRT_2, 0.0))
        .sub(&position_poly(f)?);
    Ok(inner.scale(-I))
}

/// Pointwise residuals of `q∘W = W∘p` and `p∘W = -W∘q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapReport {
    /// `max_y |q W f - W p f|`, relative to the largest value seen.
    pub position_swap: f64,
    /// `max_y |p W f + W q f|`, relative to the largest value seen.
    pub momentum_swap: f64,
    pub points: usize,
}

impl SwapReport {
    pub fn max(&self) -> f64 {
        self.position_swap.max(self.momentum_swap)
    }
}

pub fn swap_relations_check(f: &Polynomial, points: &[f64]) -> Result<SwapReport> {
    let wf = wiener_plancherel(f);
    let qw = position_poly(&wf)?;
    let wp = wiener_plancherel(&momentum_poly(f)?);
    let pw = momentum_poly(&wf)?;
    let wq = wiener_plancherel(&position_poly(f)?);
    let (mut scale, mut d1, mut d2) = (0.0f64, 0.0f64, 0.0f64);
    for &y in points {
        let (a, b, c, d) = (qw.eval(y), wp.eval(y), pw.eval(y), wq.eval(y));
        scale = scale
            .max(a.norm())
            .max(b.norm())
            .max(c.norm())
            .max(d.norm());
        d1 = d1.max((a - b).norm());
        d2 = d2.max((c + d).norm());
    }
    let scale = scale.max(f64::MIN_POSITIVE);
    Ok(SwapReport {
        position_swap: d1 / scale,
        momentum_swap: d2 / scale,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_he_coefficients() {
        let he4 = Polynomial::hermite_he(4).unwrap();
        let expect = Polynomial::from_real(&[3.0, 0.0, -6.0, 0.0, 1.0]).unwrap();
        assert_eq!(he4, expect);
        assert!(Polynomial::hermite_he(61).is_err());
    }

    #[test]
    fn hermite_round_trip() {
        let c: Vec<Complex64> = (0..8)
            .map(|k| Complex64::new(k as f64 - 3.0, 0.5 * k as f64))
            .collect();
        let p = Polynomial::from_hermite(&c).unwrap();
        let back = p.to_hermite();
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn wiener_plancherel_eigenrelation_is_exact() {
        for n in 0..=10 {
            let he = Polynomial::hermite_he(n).unwrap();
            let w = wiener_plancherel(&he);
            assert_eq!(w, he.scale(minus_i_pow(n)), "n = {n}");
        }
    }

    #[test]
    fn wiener_plancherel_low_degrees() {
        let y = Polynomial::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(wiener_plancherel(&y), y.scale(-I));
        let one = Polynomial::from_real(&[1.0]).unwrap();
        assert_eq!(wiener_plancherel(&one), one);
    }

    #[test]
    fn fourth_power_is_identity() {
        let p = Polynomial::from_real(&[1.0, -2.0, 0.5, 3.0, 0.0, 1.0, 7.0]).unwrap();
        let w4 = (0..4).fold(p.clone(), |acc, _| wiener_plancherel(&acc));
        assert!(w4.sub(&p).max_coeff() < 1e-12 * p.max_coeff().max(1.0) * 1e3);
    }

    #[test]
    fn swap_relations_on_h0_and_h1() {
        let pts = [0.0, 1.0, 2.0];
        for n in 0..2 {
            let r = swap_relations_check(&Polynomial::hermite(n).unwrap(), &pts).unwrap();
            assert!(r.max() < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn degree_cap_enforced() {
        let big = Polynomial::new(vec![Complex64::new(1.0, 0.0); 61]).unwrap();
        assert!(big.times_y().is_err());
    }
}
