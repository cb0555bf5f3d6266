use rand::Rng;
use rayon::prelude::*;

use super::{kernel_for_rank, ExperimentRecord, SamplerKind};
use crate::continuous_sampler::sample;
use crate::estimators::{
    biweight_bump, constant_one, quadrature_adjusted, quadrature_basic, test_function_library,
    DesignPoints, DesignRule, TestFunction,
};
use crate::rng::{stream_seed, trial_rng, trial_seed};
use crate::{stats, Error, Result};

/// Radius of the biweight weight used with periodized db2.
pub const BUMP_RADIUS: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightChoice {
    /// Biweight bump for db2, `ω ≡ 1` for every other sampler.
    Auto,
    One,
    Bump,
}

impl WeightChoice {
    pub fn resolve(self, sampler: SamplerKind, dim: usize) -> TestFunction {
        match (self, sampler) {
            (WeightChoice::One, _) => constant_one(dim),
            (WeightChoice::Bump, _) | (WeightChoice::Auto, SamplerKind::Db2) => {
                biweight_bump(dim, BUMP_RADIUS)
            }
            (WeightChoice::Auto, _) => constant_one(dim),
        }
    }
}

impl std::str::FromStr for WeightChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(WeightChoice::Auto),
            "one" => Ok(WeightChoice::One),
            "bump" => Ok(WeightChoice::Bump),
            _ => Err(Error::InvalidParameter(format!("unknown weight `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub sampler: SamplerKind,
    pub dim: usize,
    pub function: String,
    pub weight: WeightChoice,
    pub design: DesignRule,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRow {
    pub sampler: SamplerKind,
    pub function: String,
    pub dim: usize,
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
    pub mse: f64,
}

#[derive(Debug, Clone)]
pub struct QuadratureSummary {
    pub rows: Vec<QuadratureRow>,
    /// Least-squares slope of `log MSE` against `log n`.
    pub slope: f64,
    pub truth: f64,
}

impl QuadratureSummary {
    pub const HEADER: [&'static str; 9] = [
        "sampler", "fn", "d", "n", "trials", "variance", "slope", "mse", "mean",
    ];

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.sampler.to_string(),
                    r.function.clone(),
                    r.dim.to_string(),
                    r.n.to_string(),
                    r.trials.to_string(),
                    r.variance.to_string(),
                    self.slope.to_string(),
                    r.mse.to_string(),
                    r.mean.to_string(),
                ]
            })
            .collect()
    }
}

/// Sampler, dimension and sample size of one quadrature run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureCase {
    pub sampler: SamplerKind,
    pub dim: usize,
    pub n: usize,
    /// Design rule of the db2 control variate; ignored by other samplers.
    pub design: DesignRule,
}

/// One estimate of `∫ f ω` per trial. Estimators: sample mean (iid), the
/// basic DPP estimator (haar, ope) and the adjusted one (db2).
pub fn quadrature_estimates(
    case: &QuadratureCase,
    f: &TestFunction,
    omega: &TestFunction,
    trials: usize,
    master: u64,
) -> Result<Vec<ExperimentRecord>> {
    let QuadratureCase {
        sampler,
        dim,
        n,
        design,
    } = *case;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let stream = stream_seed(master, &format!("quadrature/{sampler}/{dim}/{n}"));
    let kernel = match sampler {
        SamplerKind::Iid => None,
        other => Some(kernel_for_rank(other, dim, n)?),
    };
    let design = match sampler {
        SamplerKind::Db2 => Some(DesignPoints::new(
            kernel.as_ref().expect("db2 kernel"),
            design,
        )?),
        _ => None,
    };
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(stream, t);
            let value = match (&kernel, &design) {
                (None, _) => {
                    let mut x = vec![0.0; dim];
                    let mut acc = 0.0;
                    for _ in 0..n {
                        x.iter_mut().for_each(|c| *c = rng.random());
                        acc += f.eval(&x) * omega.eval(&x);
                    }
                    acc / n as f64
                }
                (Some(k), None) => quadrature_basic(&sample(k, &mut rng)?, k, f, omega)?,
                (Some(k), Some(dp)) => quadrature_adjusted(&sample(k, &mut rng)?, k, f, omega, dp)?,
            };
            Ok(ExperimentRecord {
                experiment: "quadrature".into(),
                sampler: sampler.to_string(),
                n,
                trial: t,
                seed: trial_seed(stream, t),
                metric: "estimate".into(),
                value,
            })
        })
        .collect()
}

pub fn run_quadrature_experiment(cfg: &QuadratureConfig) -> Result<QuadratureSummary> {
    if cfg.trials < 2 {
        return Err(Error::InvalidParameter("need at least 2 trials".into()));
    }
    let f = test_function_library(&cfg.function, cfg.dim)?;
    let omega = cfg.weight.resolve(cfg.sampler, cfg.dim);
    let truth = f.integral_against(&omega)?;
    let mut n_list = cfg.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in &n_list {
        let est: Vec<f64> = quadrature_estimates(
            &QuadratureCase {
                sampler: cfg.sampler,
                dim: cfg.dim,
                n,
                design: cfg.design,
            },
            &f,
            &omega,
            cfg.trials,
            cfg.seed,
        )?
        .into_iter()
        .map(|r| r.value)
        .collect();
        rows.push(QuadratureRow {
            sampler: cfg.sampler,
            function: f.name().to_string(),
            dim: cfg.dim,
            n,
            trials: cfg.trials,
            mean: stats::mean(&est),
            variance: stats::variance(&est),
            mse: stats::mse(&est, truth),
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let mses: Vec<f64> = rows.iter().map(|r| r.mse).collect();
    let slope = if rows.len() >= 2 {
        stats::loglog_slope(&ns, &mses)
    } else {
        f64::NAN
    };
    Ok(QuadratureSummary { rows, slope, truth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_iid_rate() {
        let cfg = QuadratureConfig {
            sampler: SamplerKind::Iid,
            dim: 1,
            function: "gamma0.75".into(),
            weight: WeightChoice::Auto,
            design: DesignRule::default(),
            n_list: vec![4, 16, 64],
            trials: 400,
            seed: 1,
        };
        let a = run_quadrature_experiment(&cfg).unwrap();
        let b = run_quadrature_experiment(&cfg).unwrap();
        assert_eq!(a.csv_rows(), b.csv_rows());
        assert!((a.slope + 1.0).abs() < 0.3, "{}", a.slope);
        assert!((a.truth - 1.0).abs() < 1e-9);
    }

    #[test]
    fn haar_with_constant_function_has_no_error() {
        let one = constant_one(2);
        let mut case = QuadratureCase {
            sampler: SamplerKind::Haar,
            dim: 2,
            n: 16,
            design: DesignRule::default(),
        };
        let recs = quadrature_estimates(&case, &one, &one, 10, 3).unwrap();
        assert!(recs.iter().all(|r| (r.value - 1.0).abs() < 1e-12));
        case.n = 8;
        assert!(quadrature_estimates(&case, &one, &one, 10, 3).is_err());
    }
}
