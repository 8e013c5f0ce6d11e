//! Hermite spectral representation of the Ornstein-Uhlenbeck operator.
//!
//! `h_n` denotes the probabilists' Hermite polynomial normalised in
//! `L²(γ)`, tensorised over coordinates; `L h_n = |n| h_n`. Everything in
//! this module is computed independently of the kernel formulas in
//! [`crate::weyl_kernel`], so it can serve as ground truth for them.

mod operators;
mod polynomial;

pub use operators::{
    apply_momentum, apply_position, conjugated_momentum, conjugated_position, hamiltonian,
    ou_generator, richardson, GroundTransform, DEFAULT_FD_STEP,
};
pub use polynomial::{
    momentum_poly, position_poly, swap_relations_check, wiener_plancherel, Polynomial, SwapReport,
    MAX_POLY_DEGREE,
};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::func::Func;
use crate::plane_map::WeylParameter;
use crate::quadrature::{QuadKind, QuadratureSpec};

pub const MAX_HERMITE_INDEX: usize = 500;
pub const DEFAULT_ORDER: usize = 40;
/// Relative tail energy above which [`expand`] warns.
pub const TAIL_WARNING: f64 = 1e-8;

/// `h_n(x)`, orthonormal in `L²(γ)`, by the three-term recurrence
/// `h_{n+1} = (x h_n - √n h_{n-1}) / √(n+1)`.
pub fn hermite_basis(n: usize, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_INDEX {
        return Err(invalid(
            "n",
            format!("Hermite index {n} exceeds {MAX_HERMITE_INDEX}"),
        ));
    }
    Ok(hermite_table(n, x)[n])
}

/// `[h_0(x), …, h_nmax(x)]`.
pub fn hermite_table(nmax: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(nmax + 1);
    h.push(1.0);
    if nmax == 0 {
        return h;
    }
    h.push(x);
    for n in 1..nmax {
        let next = (x * h[n] - (n as f64).sqrt() * h[n - 1]) / ((n + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

/// All multi-indices `n ∈ N^dim` with `|n| ≤ order`, by total degree and
/// then lexicographically.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn fill(dim: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim - 1 {
            let used: usize = prefix.iter().sum();
            let mut idx = prefix.clone();
            idx.push(total - used);
            out.push(idx);
            return;
        }
        let used: usize = prefix.iter().sum();
        for k in (0..=total - used).rev() {
            prefix.push(k);
            fill(dim, total, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=order {
        fill(dim, total, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

/// Truncated expansion `f = Σ_{|n| ≤ N} c_n h_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    pub dim: usize,
    pub order: usize,
    pub coeffs: Vec<Complex64>,
    indices: Vec<Vec<usize>>,
}

impl HermiteExpansion {
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension {
                dim,
                reason: "spectral machinery supports 1 <= dim <= 3",
            });
        }
        let indices = multi_indices(dim, order);
        Ok(Self {
            dim,
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); indices.len()],
            indices,
        })
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let mut e = Self::zeros(dim, order)?;
        if coeffs.len() != e.coeffs.len() {
            return Err(invalid(
                "coeffs",
                format!(
                    "expected {} coefficients, got {}",
                    e.coeffs.len(),
                    coeffs.len()
                ),
            ));
        }
        e.coeffs = coeffs;
        Ok(e)
    }

    /// The single basis function `h_n`.
    pub fn basis(dim: usize, order: usize, n: &[usize]) -> Result<Self> {
        let mut e = Self::zeros(dim, order)?;
        let k = e
            .position(n)
            .ok_or_else(|| invalid("n", format!("{n:?} outside order {order}")))?;
        e.coeffs[k] = Complex64::new(1.0, 0.0);
        Ok(e)
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn position(&self, n: &[usize]) -> Option<usize> {
        self.indices.iter().position(|m| m.as_slice() == n)
    }

    pub fn coeff(&self, n: &[usize]) -> Complex64 {
        self.position(n)
            .map(|k| self.coeffs[k])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn degree(&self, k: usize) -> usize {
        self.indices[k].iter().sum()
    }

    /// `‖f‖²_{L²(γ)}` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// Energy in the top shell `|n| = N`.
    pub fn tail_energy(&self) -> f64 {
        (0..self.coeffs.len())
            .filter(|&k| self.degree(k) == self.order)
            .map(|k| self.coeffs[k].norm_sqr())
            .sum()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let tables: Vec<Vec<f64>> = x.iter().map(|&xi| hermite_table(self.order, xi)).collect();
        self.indices
            .iter()
            .zip(&self.coeffs)
            .map(|(n, c)| {
                let basis: f64 = n.iter().enumerate().map(|(j, &nj)| tables[j][nj]).product();
                c * basis
            })
            .sum()
    }

    pub fn to_func(&self) -> Func {
        let e = self.clone();
        Func::new(move |x| e.eval(x))
    }

    /// Multiplies coefficient `c_n` by `m(|n|)`.
    pub fn map_degree(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let mut out = self.clone();
        for (k, c) in out.coeffs.iter_mut().enumerate() {
            *c *= m(self.indices[k].iter().sum());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.order != other.order {
            return Err(invalid("expansion", "shape mismatch"));
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ExpansionJson {
    dim: usize,
    #[serde(rename = "N")]
    order: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for HermiteExpansion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExpansionJson {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermiteExpansion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = ExpansionJson::deserialize(deserializer)?;
        let coeffs = j
            .coeffs
            .iter()
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        HermiteExpansion::from_coeffs(j.dim, j.order, coeffs).map_err(serde::de::Error::custom)
    }
}

/// `c_n = ∫ f h_n dγ` by tensor Gauss-Hermite quadrature, contracting one
/// axis at a time.
pub fn expand(f: &Func, order: usize, quad: &QuadratureSpec) -> Result<HermiteExpansion> {
    quad.validate()?;
    if quad.kind != QuadKind::GaussHermite {
        return Err(invalid("quad", "expansion uses Gauss-Hermite quadrature"));
    }
    let dim = quad.dim;
    let rule = quad.gaussian_rule(1.0);
    let n = rule.len();
    let m = order + 1;
    let tables: Vec<Vec<f64>> = rule.iter().map(|&(x, _)| hermite_table(order, x)).collect();

    // weighted samples on the tensor grid, axis 0 fastest
    let total = n.pow(dim as u32);
    let mut data = Vec::with_capacity(total);
    let mut point = vec![0.0; dim];
    for flat in 0..total {
        let mut rest = flat;
        let mut w = 1.0;
        for p in point.iter_mut() {
            let k = rest % n;
            rest /= n;
            *p = rule[k].0;
            w *= rule[k].1;
        }
        data.push(if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            f.eval(&point) * w
        });
    }

    // contract axis a: replace extent n by m
    let mut shape = vec![n; dim];
    for axis in 0..dim {
        let inner: usize = shape[..axis].iter().product();
        let outer: usize = shape[axis + 1..].iter().product();
        let mut next = vec![Complex64::new(0.0, 0.0); inner * m * outer];
        for o in 0..outer {
            for k in 0..n {
                let src = &data[(o * n + k) * inner..(o * n + k + 1) * inner];
                for (deg, &h) in tables[k].iter().enumerate() {
                    let dst = &mut next[(o * m + deg) * inner..(o * m + deg + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s * h;
                    }
                }
            }
        }
        data = next;
        shape[axis] = m;
    }

    let mut e = HermiteExpansion::zeros(dim, order)?;
    for (k, idx) in e.indices.iter().enumerate() {
        let mut flat = 0;
        for j in (0..dim).rev() {
            flat = flat * m + idx[j];
        }
        e.coeffs[k] = data[flat];
    }
    let energy = e.energy();
    let tail = e.tail_energy();
    if energy > 0.0 && tail > TAIL_WARNING * energy {
        log::warn!(
            "Hermite expansion tail {tail:.2e} exceeds {TAIL_WARNING:.0e} of energy {energy:.2e}"
        );
    }
    Ok(e)
}

/// `exp(-zL)`: `c_n ↦ e^{-z|n|} c_n`, for `Re z ≥ 0`.
pub fn apply_semigroup_spectral(z: Complex64, f: &HermiteExpansion) -> Result<HermiteExpansion> {
    if !(z.re >= 0.0) {
        return Err(Error::Domain(format!("semigroup needs Re z >= 0, got {z}")));
    }
    Ok(f.map_degree(|n| (-z * n as f64).exp()))
}

/// `(I + L)^{-1}`: `c_n ↦ c_n / (1 + |n|)`.
pub fn apply_resolvent(f: &HermiteExpansion) -> HermiteExpansion {
    f.map_degree(|n| Complex64::new(1.0 / (1.0 + n as f64), 0.0))
}

/// Eigenvalue of `a_s(Q, P)` on `h_n`: `(1+s)^{-d} ω^{|n|}` with
/// `ω = (1-s)/(1+s)`.
pub fn weyl_gaussian_eigenvalue(s: &WeylParameter, degree: usize, dim: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let omega = (one - s.s) / (one + s.s);
    (one + s.s).powi(-(dim as i32)) * omega.powu(degree as u32)
}

/// `a_s(Q, P)` applied in the Hermite basis.
pub fn apply_weyl_gaussian_spectral(s: &WeylParameter, f: &HermiteExpansion) -> HermiteExpansion {
    f.map_degree(|n| weyl_gaussian_eigenvalue(s, n, f.dim))
}

/// `‖a_s(Q, P)‖_{L²(γ) → L²(γ)} = |1+s|^{-d} sup_n |ω|^n = |1+s|^{-d}`
/// since `|ω| < 1` whenever `Re s > 0`.
pub fn weyl_gaussian_l2_norm(s: &WeylParameter, dim: usize) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let omega = ((one - s.s) / (one + s.s)).norm();
    debug_assert!(omega < 1.0);
    (one + s.s).norm().powi(-(dim as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_hermite_functions() {
        for &x in &[-2.0, -0.3, 0.0, 1.7] {
            assert_eq!(hermite_basis(0, x).unwrap(), 1.0);
            assert_eq!(hermite_basis(1, x).unwrap(), x);
            let h2 = (x * x - 1.0) / 2f64.sqrt();
            assert!((hermite_basis(2, x).unwrap() - h2).abs() < 1e-15);
        }
        assert!(hermite_basis(501, 0.0).is_err());
    }

    #[test]
    fn recurrence_matches_direct_polynomial() {
        // He_10 = x^10 - 45x^8 + 630x^6 - 3150x^4 + 4725x^2 - 945
        let x: f64 = 2.0;
        let he10 = x.powi(10) - 45.0 * x.powi(8) + 630.0 * x.powi(6) - 3150.0 * x.powi(4)
            + 4725.0 * x * x
            - 945.0;
        let norm = (1..=10).map(|k| k as f64).product::<f64>().sqrt();
        assert!((hermite_basis(10, x).unwrap() - he10 / norm).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_under_gauss_hermite() {
        let quad = QuadratureSpec::gauss_hermite(60, 1).unwrap();
        let rule = quad.gaussian_rule(1.0);
        let tables: Vec<Vec<f64>> = rule.iter().map(|&(x, _)| hermite_table(20, x)).collect();
        for m in 0..=20 {
            for n in 0..=20 {
                let v: f64 = rule
                    .iter()
                    .zip(&tables)
                    .map(|(&(_, w), t)| w * t[m] * t[n])
                    .sum();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10, "({m},{n}): {v}");
            }
        }
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 5).len(), 6);
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(3, 40).len(), 12341);
        assert_eq!(
            multi_indices(2, 1),
            vec![vec![0, 0], vec![1, 0], vec![0, 1]]
        );
    }

    #[test]
    fn expand_basis_and_constant() {
        let quad = QuadratureSpec::default_for_dim(1);
        let h3 = Func::real(|x| hermite_basis(3, x[0]).unwrap());
        let e = expand(&h3, 40, &quad).unwrap();
        for (k, c) in e.coeffs.iter().enumerate() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((c - expect).norm() < 1e-12, "{k}: {c}");
        }
        let one = expand(&Func::real(|_| 1.0), 10, &quad).unwrap();
        assert!((one.coeffs[0] - 1.0).norm() < 1e-13);
        assert!(one.coeffs[1..].iter().all(|c| c.norm() < 1e-13));
    }

    #[test]
    fn expand_in_two_dimensions() {
        let quad = QuadratureSpec::gauss_hermite(20, 2).unwrap();
        let f = Func::real(|x| x[0] * (x[1] * x[1] - 1.0));
        let e = expand(&f, 4, &quad).unwrap();
        assert!((e.coeff(&[1, 2]) - 2f64.sqrt()).norm() < 1e-12);
        assert!((e.energy() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn semigroup_and_resolvent_multipliers() {
        let h4 = HermiteExpansion::basis(1, 6, &[4]).unwrap();
        let same = apply_semigroup_spectral(Complex64::new(0.0, 0.0), &h4).unwrap();
        assert_eq!(same, h4);
        let r = apply_resolvent(&h4);
        assert!((r.coeff(&[4]) - 0.2).norm() < 1e-16);
        let h0 = HermiteExpansion::basis(1, 6, &[0]).unwrap();
        assert_eq!(apply_resolvent(&h0), h0);
        assert!(apply_semigroup_spectral(Complex64::new(-0.1, 0.0), &h4).is_err());
    }

    #[test]
    fn json_layout() {
        let e = HermiteExpansion::basis(1, 2, &[1]).unwrap();
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["N"], 2);
        assert_eq!(v["coeffs"][1][0], 1.0);
        let back: HermiteExpansion = serde_json::from_value(v).unwrap();
        assert_eq!(back, e);
    }
}
