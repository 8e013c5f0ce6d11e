//! Small complex helpers that `num-complex` does not provide.

use num_complex::Complex64;

/// `e^z - 1` without cancellation for small `|z|`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half_sin = (0.5 * y).sin();
    // cos y - 1 = -2 sin^2(y/2)
    let re = x.exp_m1() * y.cos() - 2.0 * half_sin * half_sin;
    let im = x.exp() * y.sin();
    Complex64::new(re, im)
}

/// Principal branch of `w^a` for real exponent `a`.
///
/// Callers guarantee `Re w > 0` (or at least `w` off the negative axis), so
/// the branch is continuous on their domains.
pub fn principal_powf(w: Complex64, a: f64) -> Complex64 {
    if a == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (w.ln() * a).exp()
}

/// `|a - b| / max(|a|, |b|)`, with the convention that two exact zeros agree.
pub fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

pub fn rel_diff_real(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Parses `"re,im"` into a complex number.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let mut parts = text.split(',');
    let re = parse_real(parts.next()?)?;
    let im = match parts.next() {
        Some(t) => parse_real(t)?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return None;
    }
    Some(Complex64::new(re, im))
}

/// Parses a decimal or a rational `"a/b"`.
pub fn parse_real(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        if den == 0.0 {
            return None;
        }
        return Some(num / den);
    }
    text.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_matches_exp_away_from_zero() {
        for &(re, im) in &[(0.3, 1.2), (-2.0, 3.0), (1e-9, 2e-9), (0.0, 0.0)] {
            let z = Complex64::new(re, im);
            let d = expm1(z) - (z.exp() - 1.0);
            assert!(d.norm() < 1e-15, "{z}: {d}");
        }
        let tiny = Complex64::new(1e-12, -3e-12);
        assert!(rel_diff(expm1(tiny), tiny) < 1e-11);
    }

    #[test]
    fn parses_rationals_and_pairs() {
        assert_eq!(parse_real("4/3"), Some(4.0 / 3.0));
        assert_eq!(parse_real(" 1.5 "), Some(1.5));
        assert_eq!(parse_real("1/0"), None);
        assert_eq!(parse_complex("0.5,-2"), Some(Complex64::new(0.5, -2.0)));
        assert_eq!(parse_complex("3"), Some(Complex64::new(3.0, 0.0)));
        assert_eq!(parse_complex("1,2,3"), None);
    }
}
