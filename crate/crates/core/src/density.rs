//! Product-kernel density estimation with per-dimension Scott bandwidths.

use rayon::prelude::*;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdeKernel {
    /// `0.75 (1 − u²)` on `|u| ≤ 1`.
    Epanechnikov,
    /// Standard normal density.
    Gaussian,
}

impl KdeKernel {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            KdeKernel::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KdeKernel::Gaussian => (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        }
    }
}

/// `h_i = σ̂_i N^{-1/(d+4)}` with `σ̂_i` the unbiased per-dimension standard deviation.
pub fn scott_bandwidth(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "Scott's rule needs at least 2 points, got {n}"
        )));
    }
    let d = points[0].len();
    let factor = (n as f64).powf(-1.0 / (d as f64 + 4.0));
    (0..d)
        .map(|i| {
            let mean = points.iter().map(|p| p[i]).sum::<f64>() / n as f64;
            let var = points.iter().map(|p| (p[i] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            if var <= 0.0 {
                Err(Error::ZeroVariance { dim: i })
            } else {
                Ok(var.sqrt() * factor)
            }
        })
        .collect()
}

/// `ρ̂(x) = (1/N) Σ_i Π_j h_j^{-1} k((x_j − X_ij) / h_j)`.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    points: Vec<Vec<f64>>,
    kernel: KdeKernel,
    bandwidth: Vec<f64>,
    /// Training indices sorted by the first coordinate, for compact kernels.
    order: Vec<usize>,
    first: Vec<f64>,
}

impl DensityEstimate {
    /// Fits with Scott's bandwidth.
    pub fn fit(points: &[Vec<f64>], kernel: KdeKernel) -> Result<Self> {
        let h = scott_bandwidth(points)?;
        Self::with_bandwidth(points, kernel, h)
    }

    pub fn with_bandwidth(
        points: &[Vec<f64>],
        kernel: KdeKernel,
        bandwidth: Vec<f64>,
    ) -> Result<Self> {
        let d = bandwidth.len();
        if points.is_empty() {
            return Err(Error::Degenerate("density estimate needs data".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        if bandwidth.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::InvalidParameter(
                "bandwidths must be positive".into(),
            ));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
        let first = order.iter().map(|&i| points[i][0]).collect();
        Ok(DensityEstimate {
            points: points.to_vec(),
            kernel,
            bandwidth,
            order,
            first,
        })
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn kernel(&self) -> KdeKernel {
        self.kernel
    }

    pub fn dim(&self) -> usize {
        self.bandwidth.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let norm: f64 = self.bandwidth.iter().product::<f64>() * self.points.len() as f64;
        let term = |p: &Vec<f64>| -> f64 {
            p.iter()
                .zip(x)
                .zip(&self.bandwidth)
                .map(|((&pi, &xi), &h)| self.kernel.eval((xi - pi) / h))
                .product()
        };
        let sum: f64 = match self.kernel {
            KdeKernel::Epanechnikov => {
                let h0 = self.bandwidth[0];
                let lo = self.first.partition_point(|&v| v < x[0] - h0);
                let hi = self.first.partition_point(|&v| v <= x[0] + h0);
                self.order[lo..hi]
                    .iter()
                    .map(|&i| term(&self.points[i]))
                    .sum()
            }
            KdeKernel::Gaussian => self.points.iter().map(term).sum(),
        };
        sum / norm
    }

    /// `ρ̂` at every training point, in training order.
    pub fn eval_at_data(&self) -> Vec<f64> {
        self.points.par_iter().map(|p| self.eval(p)).collect()
    }
}

/// `max_i |ρ_i / ρ̂_i − 1|`.
pub fn max_relative_error(rho: &[f64], rho_hat: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, (&r, &rh)) in rho.iter().zip(rho_hat).enumerate() {
        if !(rh > 0.0) {
            return Err(Error::NonPositiveDensity {
                index: i,
                value: rh,
            });
        }
        worst = worst.max((r / rh - 1.0).abs());
    }
    Ok(worst)
}

/// The relative-error diagnostic `ε̂ = max_i |ρ(X_i)/ρ̂(X_i) − 1|` of a fitted
/// estimate against a known density.
pub fn relative_error_diagnostic<F>(
    est: &DensityEstimate,
    true_density: F,
    data: &[Vec<f64>],
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let rho: Vec<f64> = data.par_iter().map(|p| true_density(p)).collect();
    let rho_hat: Vec<f64> = data.par_iter().map(|p| est.eval(p)).collect();
    max_relative_error(&rho, &rho_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn scott_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let pts: Vec<Vec<f64>> = (0..1024)
            .map(|_| vec![normal.sample(&mut rng), normal.sample(&mut rng)])
            .collect();
        let h = scott_bandwidth(&pts).unwrap();
        for (i, hi) in h.iter().enumerate() {
            let n = pts.len() as f64;
            let m = pts.iter().map(|p| p[i]).sum::<f64>() / n;
            let sd = (pts.iter().map(|p| (p[i] - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!((hi / sd - 0.314_980_262_473_718_3).abs() < 1e-12);
        }
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| vec![3.0 * p[0], 3.0 * p[1]]).collect();
        let h3 = scott_bandwidth(&scaled).unwrap();
        assert!((h3[0] - 3.0 * h[0]).abs() < 1e-12);
        assert!(matches!(
            scott_bandwidth(&pts[..1]),
            Err(Error::Degenerate(_))
        ));
        let flat = vec![vec![0.5, 1.0], vec![0.5, 2.0]];
        assert!(matches!(
            scott_bandwidth(&flat),
            Err(Error::ZeroVariance { dim: 0 })
        ));
    }

    #[test]
    fn single_point_values() {
        let g =
            DensityEstimate::with_bandwidth(&[vec![0.3]], KdeKernel::Gaussian, vec![1.0]).unwrap();
        assert!((g.eval(&[0.3]) - 0.398_942_280_401_432_7).abs() < 1e-12);
        let e = DensityEstimate::with_bandwidth(
            &[vec![0.3, 0.3]],
            KdeKernel::Epanechnikov,
            vec![0.1, 0.1],
        )
        .unwrap();
        assert_eq!(e.eval(&[0.3, 0.45]), 0.0);
        assert_eq!(e.eval(&[0.45, 0.3]), 0.0);
    }

    #[test]
    fn positive_at_training_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let normal = Normal::new(0.5, 0.1).unwrap();
        let pts: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![normal.sample(&mut rng), normal.sample(&mut rng)])
            .collect();
        let est = DensityEstimate::fit(&pts, KdeKernel::Epanechnikov).unwrap();
        let h = est.bandwidth().to_vec();
        let floor = 0.75 * 0.75 / (pts.len() as f64 * h[0] * h[1]);
        for v in est.eval_at_data() {
            assert!(v >= floor);
        }
    }

    #[test]
    fn integrates_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let normal = Normal::new(0.5, 0.08).unwrap();
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![normal.sample(&mut rng), normal.sample(&mut rng)])
            .collect();
        for kernel in [KdeKernel::Epanechnikov, KdeKernel::Gaussian] {
            let est = DensityEstimate::fit(&pts, kernel).unwrap();
            // the bulk sits well inside [0,1]^2; integrate over a padded box
            let m = 401;
            let (lo, hi) = (-0.2, 1.2);
            let w = (hi - lo) / m as f64;
            let mut total = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let x = [lo + (i as f64 + 0.5) * w, lo + (j as f64 + 0.5) * w];
                    total += est.eval(&x) * w * w;
                }
            }
            assert!((total - 1.0).abs() < 0.01, "{kernel:?}: {total}");
        }
    }

    #[test]
    fn relative_error_examples() {
        let rho = [1.0, 2.0, 0.5];
        assert_eq!(max_relative_error(&rho, &rho).unwrap(), 0.0);
        let doubled: Vec<f64> = rho.iter().map(|r| 2.0 * r).collect();
        assert!((max_relative_error(&rho, &doubled).unwrap() - 0.5).abs() < 1e-15);
        // scale invariance
        let a: Vec<f64> = rho.iter().map(|r| 7.0 * r).collect();
        let b: Vec<f64> = doubled.iter().map(|r| 7.0 * r).collect();
        assert_eq!(
            max_relative_error(&a, &b).unwrap(),
            max_relative_error(&rho, &doubled).unwrap()
        );
        assert!(matches!(
            max_relative_error(&rho, &[1.0, 0.0, 1.0]),
            Err(Error::NonPositiveDensity { index: 1, .. })
        ));
    }
}
