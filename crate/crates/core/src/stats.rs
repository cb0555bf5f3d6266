//! Small statistical helpers shared by experiments and self-checks.

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Mean squared deviation from a known target.
pub fn mse(xs: &[f64], target: f64) -> f64 {
    xs.iter().map(|x| (x - target).powi(2)).sum::<f64>() / xs.len() as f64
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = mean(&lx);
    let my = mean(&ly);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Empirical quantile with linear interpolation between order statistics
/// (position `q (n − 1)` in the sorted sample).
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let t = pos - lo as f64;
    sorted[lo] * (1.0 - t) + sorted[hi] * t
}

/// Kolmogorov–Smirnov statistic of a sample against Uniform(0, 1).
pub fn ks_uniform(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `√(−ln(α/2) / 2) / √n`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Pearson χ² statistic and its p-value (`bins − 1` degrees of freedom).
pub fn chi_square_test(observed: &[u64], expected_probs: &[f64]) -> (f64, f64) {
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).expect("positive degrees of freedom");
    (stat, 1.0 - dist.cdf(stat))
}

/// One-sided sign test: `P(Bin(n, 1/2) ≥ wins)`.
pub fn sign_test_p_value(wins: u64, n: u64) -> f64 {
    if wins == 0 {
        return 1.0;
    }
    let dist = Binomial::new(0.5, n).expect("valid binomial");
    1.0 - dist.cdf(wins - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        assert!((loglog_slope(&x, &y) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 0.5), 3.0);
        assert!((quantile(&xs, 0.9) - 4.6).abs() < 1e-12);
    }

    #[test]
    fn sign_test_tail() {
        assert!((sign_test_p_value(1, 1) - 0.5).abs() < 1e-12);
        assert!((sign_test_p_value(2, 2) - 0.25).abs() < 1e-12);
        assert!(sign_test_p_value(115, 200) < 0.05);
        assert!(sign_test_p_value(100, 200) > 0.4);
    }

    #[test]
    fn ks_of_regular_grid_is_small() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_uniform(&xs) <= 0.0005 + 1e-12);
        assert!((ks_critical(100, 0.01) - 0.16276).abs() < 1e-4);
    }

    #[test]
    fn variance_and_mse() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-12);
        assert!((mse(&xs, 2.5) - 1.25).abs() < 1e-12);
    }
}
