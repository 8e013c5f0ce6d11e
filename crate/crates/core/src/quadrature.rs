//! Quadrature rules against the Gaussian measures `γ_τ` and Lebesgue measure.
//!
//! Gauss-Hermite nodes start from the `gauss-quad` eigen-solver, are polished
//! by Newton steps and weighted by the Christoffel function, then rescaled to
//! `γ_τ`. Rules are
//! cached per node count since the eigen-solve dominates for large counts.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussHermite;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const MIN_GH_NODES: usize = 20;
pub const MAX_GH_NODES: usize = 400;
/// Internal cap used when a rule is doubled for a convergence check.
const HARD_GH_CAP: usize = 2 * MAX_GH_NODES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadKind {
    GaussHermite,
    Trapezoid,
}

/// How an integral over `R^dim` is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub kind: QuadKind,
    pub nodes: usize,
    /// Truncation radius; only read by the trapezoid rule.
    pub window: f64,
    pub dim: usize,
}

impl QuadratureSpec {
    pub fn gauss_hermite(nodes: usize, dim: usize) -> Result<Self> {
        let spec = Self {
            kind: QuadKind::GaussHermite,
            nodes,
            window: 0.0,
            dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn trapezoid(nodes: usize, window: f64, dim: usize) -> Result<Self> {
        let spec = Self {
            kind: QuadKind::Trapezoid,
            nodes,
            window,
            dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// 200 Gauss-Hermite nodes in one dimension, 60 per axis otherwise.
    pub fn default_for_dim(dim: usize) -> Self {
        Self {
            kind: QuadKind::GaussHermite,
            nodes: if dim == 1 { 200 } else { 60 },
            window: 0.0,
            dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Dimension {
                dim: self.dim,
                reason: "quadrature supports 1 <= dim <= 3",
            });
        }
        match self.kind {
            QuadKind::GaussHermite => {
                if !(MIN_GH_NODES..=MAX_GH_NODES).contains(&self.nodes) {
                    return Err(invalid(
                        "nodes",
                        format!(
                            "Gauss-Hermite node count {} outside [{MIN_GH_NODES}, {MAX_GH_NODES}]",
                            self.nodes
                        ),
                    ));
                }
            }
            QuadKind::Trapezoid => {
                if !(self.window > 0.0 && self.window.is_finite()) {
                    return Err(invalid("window", "trapezoid window must be positive"));
                }
                if self.nodes < 2 {
                    return Err(invalid("nodes", "trapezoid needs at least 2 nodes"));
                }
            }
        }
        Ok(())
    }

    /// The same rule with twice the nodes, used for convergence checks.
    pub fn doubled(&self) -> Self {
        let nodes = match self.kind {
            QuadKind::GaussHermite => (2 * self.nodes).min(HARD_GH_CAP),
            QuadKind::Trapezoid => 2 * self.nodes - 1,
        };
        Self { nodes, ..*self }
    }

    /// One-dimensional rule `Σ w_k g(x_k) ≈ ∫ g dγ_τ`.
    pub fn gaussian_rule(&self, tau: f64) -> Vec<(f64, f64)> {
        match self.kind {
            QuadKind::GaussHermite => {
                let scale = tau.sqrt();
                standard_gauss_hermite(self.nodes)
                    .iter()
                    .map(|&(x, w)| (scale * x, w))
                    .collect()
            }
            QuadKind::Trapezoid => {
                let norm = (2.0 * std::f64::consts::PI * tau).sqrt();
                self.lebesgue_rule()
                    .into_iter()
                    .map(|(x, w)| (x, w * (-x * x / (2.0 * tau)).exp() / norm))
                    .collect()
            }
        }
    }

    /// One-dimensional trapezoid rule on `[-window, window]` for `∫ g dx`.
    pub fn lebesgue_rule(&self) -> Vec<(f64, f64)> {
        trapezoid_rule(-self.window, self.window, self.nodes)
    }

    /// `∫ g dγ_τ` over `R^dim` with the tensorised one-dimensional rule.
    pub fn integrate_gaussian<T, F>(&self, tau: f64, mut g: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(&[f64]) -> T,
    {
        let rule = self.gaussian_rule(tau);
        tensor_sum(&rule, self.dim, &mut g)
    }
}

/// Sums `Σ w_{k1}…w_{kd} g(x_{k1},…,x_{kd})` over the tensor grid.
pub fn tensor_sum<T, F>(rule: &[(f64, f64)], dim: usize, g: &mut F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: FnMut(&[f64]) -> T,
{
    let n = rule.len();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut acc = T::default();
    loop {
        let mut w = 1.0;
        for (j, &k) in idx.iter().enumerate() {
            point[j] = rule[k].0;
            w *= rule[k].1;
        }
        if w != 0.0 {
            acc = acc + g(&point) * w;
        }
        let mut j = 0;
        loop {
            if j == dim {
                return acc;
            }
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Composite trapezoid rule with `nodes` equispaced points on `[a, b]`.
pub fn trapezoid_rule(a: f64, b: f64, nodes: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / (nodes - 1) as f64;
    (0..nodes)
        .map(|k| {
            let w = if k == 0 || k == nodes - 1 { 0.5 * h } else { h };
            (a + k as f64 * h, w)
        })
        .collect()
}

type RuleCache = Mutex<HashMap<usize, Arc<[(f64, f64)]>>>;

/// Gauss-Hermite rule for the standard Gaussian measure: weights sum to one.
pub fn standard_gauss_hermite(nodes: usize) -> Arc<[(f64, f64)]> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&nodes) {
        return Arc::clone(rule);
    }
    let degree = NonZeroUsize::new(nodes).expect("node count must be positive");
    let rule: Arc<[(f64, f64)]> = GaussHermite::new(degree)
        .as_node_weight_pairs()
        .iter()
        .map(|&(t, _)| polish_node(nodes, std::f64::consts::SQRT_2 * t))
        .collect();
    cache
        .lock()
        .expect("quadrature cache poisoned")
        .insert(nodes, Arc::clone(&rule));
    rule
}

/// Hermite functions `ψ_k(x) = h_k(x) e^{-x²/4}` for `k = n-1, n`, and
/// `Σ_{k<n} ψ_k(x)²`. The Gaussian factor keeps every term bounded.
fn hermite_functions(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = (-0.25 * x * x).exp();
    let mut christoffel = 0.0;
    for k in 0..n {
        christoffel += cur * cur;
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    (prev, cur, christoffel)
}

/// Newton-refines an eigen-solver node of `h_n` and returns it with the
/// Christoffel weight `1 / Σ_{k<n} h_k(x)²`.
///
/// Eigenvector-based weights are accurate only in absolute terms, which is
/// useless for the tiny weights at the outer nodes; this form is accurate
/// relative to the weight itself.
fn polish_node(n: usize, mut x: f64) -> (f64, f64) {
    for _ in 0..8 {
        let (psi_prev, psi, _) = hermite_functions(n, x);
        // ψ_n' = √n ψ_{n-1} - (x/2) ψ_n
        let slope = (n as f64).sqrt() * psi_prev - 0.5 * x * psi;
        if slope == 0.0 {
            break;
        }
        let step = psi / slope;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    let (_, _, christoffel) = hermite_functions(n, x);
    let w = if christoffel > 0.0 {
        (-0.5 * x * x).exp() / christoffel
    } else {
        0.0
    };
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments_are_exact() {
        let spec = QuadratureSpec::gauss_hermite(40, 1).unwrap();
        let m0: f64 = spec.integrate_gaussian(1.0, |_| 1.0);
        let m2: f64 = spec.integrate_gaussian(1.0, |x| x[0] * x[0]);
        let m4: f64 = spec.integrate_gaussian(2.0, |x| x[0].powi(4));
        assert!((m0 - 1.0).abs() < 1e-13);
        assert!((m2 - 1.0).abs() < 1e-13);
        // E x^4 = 3 τ^2
        assert!((m4 - 12.0).abs() < 1e-11);
    }

    #[test]
    fn trapezoid_gaussian_rule_normalised() {
        let spec = QuadratureSpec::trapezoid(4001, 12.0, 1).unwrap();
        let m0: f64 = spec.integrate_gaussian(1.5, |_| 1.0);
        assert!((m0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_rule_in_three_dimensions() {
        let spec = QuadratureSpec::gauss_hermite(20, 3).unwrap();
        let v: f64 = spec.integrate_gaussian(1.0, |x| x[0] * x[0] * x[1] * x[1] + x[2]);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outer_weights_are_relatively_accurate() {
        // orthonormality of h_m h_n up to degree 40 needs the tiny outer
        // weights right to many significant digits
        for &n in &[60usize, 200, 400] {
            let rule = standard_gauss_hermite(n);
            let total: f64 = rule.iter().map(|r| r.1).sum();
            assert!((total - 1.0).abs() < 1e-13);
            let mut worst = 0.0f64;
            for &(x, w) in rule.iter() {
                let (_, psi, _) = hermite_functions(n, x);
                worst = worst.max(psi.abs());
                assert!(w >= 0.0);
            }
            assert!(worst < 1e-12, "{n}: residual {worst}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(QuadratureSpec::gauss_hermite(10, 1).is_err());
        assert!(QuadratureSpec::gauss_hermite(401, 1).is_err());
        assert!(QuadratureSpec::gauss_hermite(40, 4).is_err());
        assert!(QuadratureSpec::trapezoid(100, 0.0, 1).is_err());
    }
}
