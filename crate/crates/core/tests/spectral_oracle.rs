use num_complex::Complex64;
use proptest::prelude::*;

use ou_weyl::func::Func;
use ou_weyl::probe::{apply_kernel, lp_norm};
use ou_weyl::quadrature::QuadratureSpec;
use ou_weyl::spectral_oracle::{
    apply_momentum, apply_position, apply_resolvent, conjugated_momentum, conjugated_position,
    expand, hermite_basis, HermiteExpansion, DEFAULT_FD_STEP,
};
use ou_weyl::weyl_kernel::{mehler_kernel, GaussianMeasure};

fn gauss_hermite(n: usize) -> QuadratureSpec {
    QuadratureSpec::gauss_hermite(n, 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// `‖e^{λx²/2}‖²_{L²(γ)} = (1 - 2λ)^{-1/2}` against the coefficient energy.
    #[test]
    fn parseval_for_gaussians(lam in -1.0..0.4f64) {
        let f = Func::real(move |x| (0.5 * lam * x[0] * x[0]).exp());
        let e = expand(&f, 40, &gauss_hermite(200)).unwrap();
        let exact = (1.0 - 2.0 * lam).powf(-0.5);
        prop_assert!((e.energy() - exact).abs() < 1e-8 * exact, "{} vs {exact}", e.energy());
    }

    #[test]
    fn explicit_forms_match_conjugation(y in -3.0..3.0f64, a in 0.1..0.5f64, b in -1.0..1.0f64) {
        let f = Func::real(move |x| (1.0 + b * x[0]) * (-a * x[0] * x[0]).exp());
        let h = DEFAULT_FD_STEP;
        let dq = (apply_position(0, &f).eval(&[y]) - conjugated_position(0, &f).eval(&[y])).norm();
        let dp = (apply_momentum(0, &f, h).unwrap().eval(&[y])
            - conjugated_momentum(0, &f, h).unwrap().eval(&[y])).norm();
        prop_assert!(dq < 1e-6 && dp < 1e-6, "{dq} {dp}");
    }
}

#[test]
fn resolvent_matches_laplace_transform() {
    // (I + L)^{-1} f = ∫ e^{-t} e^{-tL} f dt, with e^{-tL} from the Mehler kernel
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 41];
    for c in &mut coeffs[..3] {
        *c = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    }
    let f = HermiteExpansion::from_coeffs(1, 40, coeffs).unwrap();
    let spectral = apply_resolvent(&f);
    let laguerre = gauss_quad::GaussLaguerre::new(
        std::num::NonZeroUsize::new(80).unwrap(),
        gauss_quad::FiniteAboveNegOneF64::new(0.0).unwrap(),
    );
    let quad = QuadratureSpec::default_for_dim(1);
    let g = f.to_func();
    for y in [-1.3, 0.0, 0.6, 2.1] {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(t, w) in laguerre.iter() {
            let m = mehler_kernel(Complex64::new(t, 0.0), 1).unwrap();
            acc += w * apply_kernel(&m, &g, &quad).unwrap().eval(&[y]);
        }
        let exact = spectral.eval(&[y]);
        assert!((acc - exact).norm() < 1e-6, "y = {y}: {acc} vs {exact}");
    }
}

#[test]
fn lp_norm_agrees_with_parseval_for_polynomials() {
    let gamma = GaussianMeasure::standard(1);
    let quad = gauss_hermite(80);
    let weights = [0.3, -1.2, 0.0, 0.7, 0.25, -0.05];
    let e = HermiteExpansion::from_coeffs(
        1,
        5,
        weights.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
    )
    .unwrap();
    let f = Func::real(move |x| {
        weights
            .iter()
            .enumerate()
            .map(|(n, c)| c * hermite_basis(n, x[0]).unwrap())
            .sum()
    });
    let quadrature = lp_norm(&f, 2.0, &gamma, &quad).unwrap();
    assert!(
        (quadrature - e.l2_norm()).abs() < 1e-10,
        "{quadrature} vs {}",
        e.l2_norm()
    );
}
