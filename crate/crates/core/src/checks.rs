//! Named verification suites. Each check reports the measured error next to
//! its tolerance so failures are diagnosable from the report alone.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::rngs::Xoshiro256PlusPlus;
use rand::{RngExt, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::func::Func;
use crate::plane_map::check_pq_identities;
use crate::probe::apply_kernel;
use crate::quadrature::QuadratureSpec;
use crate::spectral_oracle::{
    apply_momentum, apply_position, conjugated_momentum, conjugated_position, hamiltonian,
    hermite_basis, ou_generator, richardson, swap_relations_check, wiener_plancherel, Polynomial,
    DEFAULT_FD_STEP,
};
use crate::weyl_kernel::{kernel_identity_diff, mehler_kernel};

const SEED: u64 = 0x5eed_0f00_u64;
pub const PQ_FUZZ_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    KernelIdentity,
    SpectralCross,
    Commutation,
    Wiener,
    PqIdentities,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::KernelIdentity,
        Suite::SpectralCross,
        Suite::Commutation,
        Suite::Wiener,
        Suite::PqIdentities,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::KernelIdentity => "kernel-identity",
            Suite::SpectralCross => "spectral-cross",
            Suite::Commutation => "commutation",
            Suite::Wiener => "wiener",
            Suite::PqIdentities => "pq-identities",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| invalid("suite", format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, measured: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tol,
            pass: measured <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

/// Runs `suite`; `tol` replaces every per-check tolerance when given.
pub fn run_suite(suite: Suite, tol: Option<f64>) -> Result<SuiteReport> {
    if let Some(t) = tol {
        if !(t >= 0.0) {
            return Err(invalid(
                "tol",
                format!("tolerance must be non-negative, got {t}"),
            ));
        }
    }
    let mut checks = match suite {
        Suite::KernelIdentity => kernel_identity()?,
        Suite::SpectralCross => spectral_cross()?,
        Suite::Commutation => commutation()?,
        Suite::Wiener => wiener()?,
        Suite::PqIdentities => pq_identities()?,
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::ALL {
                all.extend(run_suite(s, None)?.checks);
            }
            all
        }
    };
    if let Some(t) = tol {
        for c in &mut checks {
            c.tol = t;
            c.pass = c.measured <= t;
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        suite,
        checks,
        pass,
    })
}

fn kernel_identity() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for d in 1..=3 {
        for &t in &[0.01, 0.1, 1.0, 5.0] {
            let diff = kernel_identity_diff(Complex64::new(t, 0.0), d)?;
            out.push(CheckResult::new(
                format!("t = {t}, d = {d}"),
                diff.max(),
                1e-12,
            ));
        }
        for &(re, im) in &[(0.5, 2.0), (0.5, -2.0), (0.2, 1.0), (0.2, -1.0)] {
            let diff = kernel_identity_diff(Complex64::new(re, im), d)?;
            out.push(CheckResult::new(
                format!("t = {re}{im:+}i, d = {d}"),
                diff.max(),
                1e-10,
            ));
        }
    }
    Ok(out)
}

fn spectral_cross() -> Result<Vec<CheckResult>> {
    let quad = QuadratureSpec::default_for_dim(1);
    let rule = quad.gaussian_rule(1.0);
    let mut out = Vec::new();
    for &t in &[0.1, 0.5, 1.0] {
        let m = mehler_kernel(Complex64::new(t, 0.0), 1)?;
        let mut worst = 0.0f64;
        for n in 0..=10 {
            let h = Func::real(move |x| hermite_basis(n, x[0]).expect("index is small"));
            let image = apply_kernel(&m, &h, &quad)?;
            let decay = (-t * n as f64).exp();
            let err2: f64 = rule
                .iter()
                .map(|&(y, w)| {
                    let expect = decay * hermite_basis(n, y).expect("index is small");
                    w * (image.eval(&[y]) - expect).norm_sqr()
                })
                .sum();
            worst = worst.max(err2.sqrt());
        }
        out.push(CheckResult::new(
            format!("Mehler vs spectral, t = {t}, n <= 10"),
            worst,
            1e-8,
        ));
    }
    Ok(out)
}

fn gaussian_test_functions() -> Vec<(&'static str, Func)> {
    vec![
        (
            "exp(-x^2/3)",
            Func::with_partial(
                |x| Complex64::new((-x[0] * x[0] / 3.0).exp(), 0.0),
                |x, _| Complex64::new(-2.0 * x[0] / 3.0 * (-x[0] * x[0] / 3.0).exp(), 0.0),
            ),
        ),
        (
            "(1 + x) exp(-x^2/5)",
            Func::with_partial(
                |x| Complex64::new((1.0 + x[0]) * (-x[0] * x[0] / 5.0).exp(), 0.0),
                |x, _| {
                    let e = (-x[0] * x[0] / 5.0).exp();
                    Complex64::new(e * (1.0 - 0.4 * x[0] * (1.0 + x[0])), 0.0)
                },
            ),
        ),
    ]
}

fn commutation() -> Result<Vec<CheckResult>> {
    let h = DEFAULT_FD_STEP;
    let points: Vec<f64> = (0..100).map(|k| -3.0 + 6.0 * k as f64 / 99.0).collect();
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::new();
    for (label, f) in gaussian_test_functions() {
        let qpf = apply_position(0, &apply_momentum(0, &f, h)?);
        let pqf = apply_momentum(0, &apply_position(0, &f), h)?;
        let mut comm = 0.0f64;
        for &y in &points {
            let fy = f.eval(&[y]);
            if fy.norm() < 1e-3 {
                continue;
            }
            let c = (qpf.eval(&[y]) - pqf.eval(&[y])) / fy;
            comm = comm.max((c - i).norm());
        }
        out.push(CheckResult::new(
            format!("[q,p] = +i on {label}"),
            comm,
            1e-6,
        ));

        let scale = points
            .iter()
            .map(|&y| f.eval(&[y]).norm())
            .fold(0.0, f64::max);
        let mut ham = 0.0f64;
        for &y in &points {
            let lhs = richardson(
                |step| hamiltonian(&f, step).expect("positive step").eval(&[y]),
                h,
            );
            let rhs = richardson(
                |step| ou_generator(&f, step).expect("positive step").eval(&[y]),
                h,
            ) + 0.5 * f.eval(&[y]);
            ham = ham.max((lhs - rhs).norm() / scale);
        }
        out.push(CheckResult::new(
            format!("(p^2+q^2)/2 = L + 1/2 on {label}"),
            ham,
            1e-6,
        ));

        let (q, qc) = (apply_position(0, &f), conjugated_position(0, &f));
        let (p, pc) = (apply_momentum(0, &f, h)?, conjugated_momentum(0, &f, h)?);
        let (mut dq, mut dp) = (0.0f64, 0.0f64);
        for &y in &points {
            dq = dq.max((q.eval(&[y]) - qc.eval(&[y])).norm());
            dp = dp.max((p.eval(&[y]) - pc.eval(&[y])).norm());
        }
        out.push(CheckResult::new(
            format!("q explicit vs U-conjugation on {label}"),
            dq,
            1e-6,
        ));
        out.push(CheckResult::new(
            format!("p explicit vs U-conjugation on {label}"),
            dp,
            1e-6,
        ));
    }
    Ok(out)
}

fn minus_i_pow(n: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ][n % 4]
}

fn wiener() -> Result<Vec<CheckResult>> {
    let mut eigen = 0.0f64;
    let mut fourth = 0.0f64;
    let mut isometry = 0.0f64;
    for n in 0..=10 {
        let he = Polynomial::hermite_he(n)?;
        let w = wiener_plancherel(&he);
        eigen = eigen.max(w.sub(&he.scale(minus_i_pow(n))).max_coeff());
        let w4 = (0..3).fold(w.clone(), |acc, _| wiener_plancherel(&acc));
        fourth = fourth.max(w4.sub(&he).max_coeff());
        let norm_in: f64 = Polynomial::hermite(n)?
            .to_hermite()
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        let norm_out: f64 = wiener_plancherel(&Polynomial::hermite(n)?)
            .to_hermite()
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        isometry = isometry.max((norm_in - norm_out).abs());
    }
    let mut out = vec![
        CheckResult::new("W He_n = (-i)^n He_n, n <= 10 (exact)", eigen, 0.0),
        CheckResult::new("W^4 = id on He_n, n <= 10 (exact)", fourth, 0.0),
        CheckResult::new("W preserves L2 norms of h_n, n <= 10", isometry, 1e-10),
    ];

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(SEED);
    let mut swap = 0.0f64;
    for n in 0..=1 {
        let r = swap_relations_check(&Polynomial::hermite(n)?, &[0.0, 1.0, 2.0])?;
        swap = swap.max(r.max());
    }
    for _ in 0..10 {
        let coeffs: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let f = Polynomial::new(coeffs)?;
        let points: Vec<f64> = (0..20).map(|_| rng.random_range(-3.0..3.0)).collect();
        swap = swap.max(swap_relations_check(&f, &points)?.max());
    }
    out.push(CheckResult::new("qW = Wp and pW = -Wq", swap, 1e-8));
    Ok(out)
}

fn pq_identities() -> Result<Vec<CheckResult>> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(SEED ^ 0x9e37_79b9);
    let mut worst = 0.0f64;
    for _ in 0..PQ_FUZZ_POINTS {
        let x = 3.0 * (1.0 - rng.random::<f64>());
        let y = rng.random_range(-3.0..3.0);
        let p = rng.random_range(1.0..4.0);
        let q = rng.random_range(1.0..4.0);
        worst = worst.max(check_pq_identities(x, y, p, q)?.max_diff());
    }
    Ok(vec![CheckResult::new(
        format!("{PQ_FUZZ_POINTS}-point fuzz of the p,q identities"),
        worst,
        1e-9,
    )])
}
