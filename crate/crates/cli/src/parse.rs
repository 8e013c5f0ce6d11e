//! Value parsers for command-line flags.

use num_complex::Complex64;

/// A real number, either decimal or a ratio such as `4/3`.
pub fn real(raw: &str) -> Result<f64, String> {
    let raw = raw.trim();
    let value = match raw.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in `{raw}`"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in `{raw}`"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in `{raw}`"));
            }
            num / den
        }
        None => raw.parse().map_err(|_| format!("not a number: `{raw}`"))?,
    };
    if !value.is_finite() {
        return Err(format!("not finite: `{raw}`"));
    }
    Ok(value)
}

/// `re,im`; a bare real is read as `re,0`.
pub fn complex(raw: &str) -> Result<Complex64, String> {
    match raw.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(real(re)?, real(im)?)),
        None => Ok(Complex64::new(real(raw)?, 0.0)),
    }
}

/// Comma-separated reals, exactly `n` of them.
pub fn reals(raw: &str, n: usize) -> Result<Vec<f64>, String> {
    let values = raw.split(',').map(real).collect::<Result<Vec<_>, _>>()?;
    if values.len() != n {
        return Err(format!(
            "expected {n} comma-separated values, got {}",
            values.len()
        ));
    }
    Ok(values)
}

/// `x0,x1,y0,y1`.
pub fn window(raw: &str) -> Result<[f64; 4], String> {
    let v = reals(raw, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}

/// `lo,hi`.
pub fn interval(raw: &str) -> Result<[f64; 2], String> {
    let v = reals(raw, 2)?;
    Ok([v[0], v[1]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Value(f64),
    /// `(1 + e^{-2t}) / p`, resolved once `t` is known.
    AutoBbg,
}

pub fn alpha(raw: &str) -> Result<Alpha, String> {
    if raw.trim() == "auto-bbg" {
        Ok(Alpha::AutoBbg)
    } else {
        real(raw).map(Alpha::Value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_and_decimals() {
        assert_eq!(real("4/3").unwrap(), 4.0 / 3.0);
        assert_eq!(real("1.3333").unwrap(), 1.3333);
        assert!(real("1/0").is_err());
        assert!(real("abc").is_err());
        assert!(real("inf").is_err());
    }

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0.5,-2").unwrap(), Complex64::new(0.5, -2.0));
        assert_eq!(complex("1").unwrap(), Complex64::new(1.0, 0.0));
        assert!(complex("1,2,3").is_err());
    }

    #[test]
    fn windows() {
        assert_eq!(window("0,2,-2,2").unwrap(), [0.0, 2.0, -2.0, 2.0]);
        assert!(window("0,2,-2").is_err());
    }
}
