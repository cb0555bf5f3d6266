//! Reference integrals: double-exponential quadrature on `[0,1]` and
//! `[0,1]²`, split at known kinks of the integrand.

use quadrature::double_exponential;

/// Default absolute tolerance per piece.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

fn pieces(breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| *b > 0.0 && *b < 1.0)
        .collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `∫_0^1 f(t) dt`, integrating separately between consecutive breakpoints.
pub fn integrate_unit<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> f64 {
    pieces(breaks)
        .into_iter()
        .map(|(a, b)| double_exponential::integrate(&f, a, b, tol).integral)
        .sum()
}

/// `∫_{[0,1]²} f(x, y) dx dy` as a nested 1-D integral; the same
/// breakpoints are used on both axes.
pub fn integrate_unit_square<F: Fn(f64, f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> f64 {
    integrate_unit(|x| integrate_unit(|y| f(x, y), breaks, tol), breaks, tol)
}

/// Integral of `f` over `[0,1]^d` for `d ∈ {1, 2}`.
pub fn integrate_cube<F: Fn(&[f64]) -> f64>(
    f: F,
    dim: usize,
    breaks: &[f64],
    tol: f64,
) -> crate::Result<f64> {
    match dim {
        1 => Ok(integrate_unit(|t| f(&[t]), breaks, tol)),
        2 => Ok(integrate_unit_square(|x, y| f(&[x, y]), breaks, tol)),
        _ => Err(crate::Error::InvalidParameter(format!(
            "reference integration supports d = 1 or 2, got {dim}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_kink() {
        assert!((integrate_unit(|t| t * t, &[], 1e-12) - 1.0 / 3.0).abs() < 1e-12);
        let g = 0.25;
        let exact = 0.5f64.powf(g) / (g + 1.0);
        let v = integrate_unit(|t: f64| (t - 0.5).abs().powf(g), &[0.5], 1e-12);
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn product_on_square() {
        let v = integrate_unit_square(|x, y| x * y, &[0.5], 1e-12);
        assert!((v - 0.25).abs() < 1e-12);
        assert!(integrate_cube(|_| 1.0, 3, &[], 1e-10).is_err());
    }
}
