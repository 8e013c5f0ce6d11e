//! Position, momentum and the ground transform acting on function values.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::func::Func;

pub const DEFAULT_FD_STEP: f64 = 1e-4;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The ground transform `U = δ ∘ E` from `L²(γ)` onto `L²(m)`, where
/// `E f = e·f` with `e(x) = exp(-|x|²/4)` and `δ f(x) = 2^{d/4} f(√2 x)`,
/// the prefactor that makes the dilation unitary on `L²(m)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GroundTransform;

impl GroundTransform {
    pub fn e(x: &[f64]) -> f64 {
        (-0.25 * norm_sqr(x)).exp()
    }

    /// `δ f`.
    pub fn dilation(f: &Func) -> Func {
        let f = f.clone();
        Func::new(move |x| {
            let y: Vec<f64> = x.iter().map(|v| SQRT_2 * v).collect();
            2f64.powf(0.25 * x.len() as f64) * f.eval(&y)
        })
    }

    /// `U f(x) = 2^{d/4} e^{-|x|²/2} f(√2 x)`.
    pub fn apply(f: &Func) -> Func {
        let f = f.clone();
        Func::new(move |x| {
            let y: Vec<f64> = x.iter().map(|v| SQRT_2 * v).collect();
            2f64.powf(0.25 * x.len() as f64) * Self::e(&y) * f.eval(&y)
        })
    }

    /// `U^{-1} g(y) = 2^{-d/4} e^{|y|²/4} g(y/√2)`.
    pub fn inverse(g: &Func) -> Func {
        let g = g.clone();
        Func::new(move |y| {
            let x: Vec<f64> = y.iter().map(|v| v / SQRT_2).collect();
            2f64.powf(-0.25 * y.len() as f64) * g.eval(&x) / Self::e(y)
        })
    }
}

fn norm_sqr(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(
            "h",
            format!("finite-difference step must be positive, got {h}"),
        ));
    }
    Ok(())
}

/// Central difference `(f(x + h e_j) - f(x - h e_j)) / 2h`.
fn central_partial(f: &Func, x: &[f64], j: usize, h: f64) -> Complex64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[j] += h;
    b[j] -= h;
    (f.eval(&a) - f.eval(&b)) / (2.0 * h)
}

fn partial(f: &Func, x: &[f64], j: usize, h: f64) -> Complex64 {
    f.exact_partial(x, j)
        .unwrap_or_else(|| central_partial(f, x, j, h))
}

/// `q_j f(y) = (y_j/√2) f(y)`. Keeps exact partials when `f` has them.
pub fn apply_position(j: usize, f: &Func) -> Func {
    let value = f.clone();
    if f.has_exact_partial() {
        let g = f.clone();
        Func::with_partial(
            move |y| y[j] / SQRT_2 * value.eval(y),
            move |y, k| {
                let d = g.exact_partial(y, k).expect("exact partial present");
                let own = if k == j {
                    g.eval(y)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                (own + y[j] * d) / SQRT_2
            },
        )
    } else {
        Func::new(move |y| y[j] / SQRT_2 * value.eval(y))
    }
}

/// `p_j f(y) = (1/i)(√2 ∂_j f(y) - (y_j/√2) f(y))`, with the exact partial of
/// `f` when available and a central difference of step `h` otherwise.
pub fn apply_momentum(j: usize, f: &Func, h: f64) -> Result<Func> {
    check_step(h)?;
    let f = f.clone();
    Ok(Func::new(move |y| {
        -I * (SQRT_2 * partial(&f, y, j, h) - y[j] / SQRT_2 * f.eval(y))
    }))
}

/// `U^{-1} x_j U f`, evaluated literally.
pub fn conjugated_position(j: usize, f: &Func) -> Func {
    let uf = GroundTransform::apply(f);
    let mult = Func::new(move |x| x[j] * uf.eval(x));
    GroundTransform::inverse(&mult)
}

/// `U^{-1} (1/i)∂_j U f`, with the derivative of `U f` by central differences.
pub fn conjugated_momentum(j: usize, f: &Func, h: f64) -> Result<Func> {
    check_step(h)?;
    let uf = GroundTransform::apply(f);
    let deriv = Func::new(move |x| -I * central_partial(&uf, x, j, h));
    Ok(GroundTransform::inverse(&deriv))
}

/// `L f = -Δf + x·∇f` by central differences; the gradient uses exact
/// partials when `f` carries them.
pub fn ou_generator(f: &Func, h: f64) -> Result<Func> {
    check_step(h)?;
    let f = f.clone();
    Ok(Func::new(move |x| {
        let centre = f.eval(x);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = x.to_vec();
        for j in 0..x.len() {
            p[j] = x[j] + h;
            let fwd = f.eval(&p);
            p[j] = x[j] - h;
            let bwd = f.eval(&p);
            p[j] = x[j];
            let lap = (fwd - 2.0 * centre + bwd) / (h * h);
            let grad = f
                .exact_partial(x, j)
                .unwrap_or_else(|| (fwd - bwd) / (2.0 * h));
            acc += -lap + x[j] * grad;
        }
        acc
    }))
}

/// `½ Σ_j (p_j² + q_j²) f`.
pub fn hamiltonian(f: &Func, h: f64) -> Result<Func> {
    check_step(h)?;
    let f = f.clone();
    Ok(Func::new(move |y| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..y.len() {
            let pf = apply_momentum(j, &f, h).expect("step checked");
            let ppf = apply_momentum(j, &pf, h).expect("step checked");
            acc += ppf.eval(y) + 0.5 * y[j] * y[j] * f.eval(y);
        }
        0.5 * acc
    }))
}

/// One Richardson step for an `O(h²)` scheme: `(4 F(h/2) - F(h)) / 3`.
pub fn richardson(scheme: impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    (4.0 * scheme(0.5 * h) - scheme(h)) / 3.0
}
