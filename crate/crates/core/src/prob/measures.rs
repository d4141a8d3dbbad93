use crate::error::{Error, Result};

fn check_prob(a: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&a) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} = {a} is not in [0, 1]")))
    }
}

/// Binary entropy `h(a) = -a log2 a - (1-a) log2 (1-a)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(a: f64) -> Result<f64> {
    check_prob(a, "binary entropy argument")?;
    Ok(h2(a))
}

/// Unchecked binary entropy for arguments already known to lie in `[0, 1]`.
pub(crate) fn h2(a: f64) -> f64 {
    let t = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    t(a) + t(1.0 - a)
}

/// Binary convolution `a * b = a(1-b) + (1-a)b`.
pub fn binary_convolution(a: f64, b: f64) -> Result<f64> {
    check_prob(a, "convolution operand")?;
    check_prob(b, "convolution operand")?;
    Ok(a * (1.0 - b) + (1.0 - a) * b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 30-digit evaluation of the closed form
        assert!((binary_entropy(0.25).unwrap() - 0.811_278_124_459_132_9).abs() < 1e-15);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn convolution_values() {
        for b in [0.0, 0.1, 0.37, 1.0] {
            assert!((binary_convolution(0.5, b).unwrap() - 0.5).abs() < 1e-15);
            assert!((binary_convolution(b, 0.0).unwrap() - b).abs() < 1e-15);
        }
        assert!((binary_convolution(0.1, 0.2).unwrap() - 0.26).abs() < 1e-15);
        assert!(binary_convolution(0.1, 1.2).is_err());
    }
}
