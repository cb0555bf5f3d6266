//! Experiment drivers: quadrature variance decay, k-means coresets and
//! Pegasos minibatches. Every driver derives one random stream per trial
//! from a master seed, so output does not depend on thread scheduling.

mod coreset;
mod pegasos;
mod quadrature;
mod record;

pub use coreset::{run_coreset_experiment, CoresetConfig, CoresetRow};
pub use pegasos::{
    full_subgradient, hinge_objective, reference_solution, run_pegasos_experiment, split_problem,
    subgradient_trace_variance, test_error, ClassBlock, MinibatchSampler, MinibatchWeighting,
    PegasosConfig, PegasosRow, SvmProblem,
};
pub use quadrature::{
    quadrature_estimates, run_quadrature_experiment, QuadratureCase, QuadratureConfig,
    QuadratureRow, QuadratureSummary, WeightChoice, BUMP_RADIUS,
};
pub use record::{write_csv, ExperimentRecord};

use std::fmt;
use std::str::FromStr;

use crate::density::{DensityEstimate, KdeKernel};
use crate::discretize::{
    build_discrete_dpp, build_feature_matrix, DiscreteProjectionDpp, FeatureMatrix,
    DEFAULT_RANK_TOLERANCE,
};
use crate::estimators::{DesignPoints, DesignRule};
use crate::kernels::{IndexMode, ProjectionKernel};
use crate::wavelets::ScalingFunction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SamplerKind {
    Iid,
    Haar,
    Db2,
    Ope,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::Iid,
        SamplerKind::Haar,
        SamplerKind::Db2,
        SamplerKind::Ope,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SamplerKind::Iid => "iid",
            SamplerKind::Haar => "haar",
            SamplerKind::Db2 => "db2",
            SamplerKind::Ope => "ope",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.label())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iid" | "uniform" => Ok(SamplerKind::Iid),
            "haar" => Ok(SamplerKind::Haar),
            "db2" | "daubechies2" => Ok(SamplerKind::Db2),
            "ope" => Ok(SamplerKind::Ope),
            _ => Err(Error::UnknownSampler(s.to_string())),
        }
    }
}

/// Parses a comma-separated sampler list; `all` expands to every sampler.
pub fn parse_samplers(s: &str) -> Result<Vec<SamplerKind>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(SamplerKind::ALL.to_vec());
    }
    let mut out: Vec<SamplerKind> = s.split(',').map(str::parse).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// `j` with `2^{dj} = n`, if it exists.
pub fn dyadic_scale(n: usize, dim: usize) -> Option<u32> {
    (0..=30u32).find(|&j| (1usize << j).checked_pow(dim as u32) == Some(n))
}

/// Projection kernel of rank `n` for a DPP sampler: Haar (interior) and
/// periodized db2 need `n = 2^{dj}`; OPE accepts any `n`.
pub fn kernel_for_rank(kind: SamplerKind, dim: usize, n: usize) -> Result<ProjectionKernel> {
    let scale = || {
        dyadic_scale(n, dim).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "{kind} needs n = 2^(dj); {n} is not of that form for d = {dim}"
            ))
        })
    };
    match kind {
        SamplerKind::Haar => {
            ProjectionKernel::wavelet(ScalingFunction::haar(), scale()?, dim, IndexMode::Interior)
        }
        SamplerKind::Db2 => ProjectionKernel::wavelet(
            ScalingFunction::daubechies2()?,
            scale()?,
            dim,
            IndexMode::Periodized,
        ),
        SamplerKind::Ope => ProjectionKernel::ope(dim, n),
        SamplerKind::Iid => Err(Error::InvalidParameter("iid sampling has no kernel".into())),
    }
}

/// A kernel discretized on a dataset with estimated density values.
#[derive(Debug, Clone)]
pub struct DiscretePipeline {
    pub kind: SamplerKind,
    pub kernel: ProjectionKernel,
    pub psi: FeatureMatrix,
    pub dpp: DiscreteProjectionDpp,
    /// Design points and `2^{-dj/2} Σ_i Φ_k(X_i)` for the control variate
    /// (db2 only).
    pub control: Option<(DesignPoints, Vec<f64>)>,
}

impl DiscretePipeline {
    pub fn build(kind: SamplerKind, rank: usize, points: &[Vec<f64>], rho: &[f64]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        let kernel = kernel_for_rank(kind, dim, rank)?;
        let psi = build_feature_matrix(&kernel, points)?;
        let dpp = build_discrete_dpp(&psi, rho, DEFAULT_RANK_TOLERANCE)?;
        let control = if kind == SamplerKind::Db2 {
            let dp = DesignPoints::new(&kernel, DesignRule::default())?;
            let sums = psi.0.row_sum().iter().map(|s| s * dp.weight).collect();
            Some((dp, sums))
        } else {
            None
        };
        Ok(DiscretePipeline {
            kind,
            kernel,
            psi,
            dpp,
            control,
        })
    }

    /// Builds the pipeline with a KDE `ρ̂` fitted on the same points.
    pub fn with_kde(
        kind: SamplerKind,
        rank: usize,
        points: &[Vec<f64>],
        kde: KdeKernel,
    ) -> Result<Self> {
        let rho = DensityEstimate::fit(points, kde)?.eval_at_data();
        Self::build(kind, rank, points, &rho)
    }

    /// `c_i = 2^{-dj/2} Σ_k Φ_k(X_i) g_k`.
    pub fn control_at(&self, i: usize, g: &[f64]) -> f64 {
        match &self.control {
            Some((dp, _)) => {
                dp.weight
                    * self
                        .psi
                        .0
                        .row(i)
                        .iter()
                        .zip(g)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            }
            None => 0.0,
        }
    }

    /// `Σ_i c_i` over the whole dataset.
    pub fn control_total(&self, g: &[f64]) -> f64 {
        match &self.control {
            Some((_, sums)) => sums.iter().zip(g).map(|(a, b)| a * b).sum(),
            None => 0.0,
        }
    }

    pub fn design_points(&self) -> Option<&DesignPoints> {
        self.control.as_ref().map(|(dp, _)| dp)
    }
}

/// Parses `"4,8,16"` into a list of integers.
pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("`{t}` is not a non-negative integer"))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_names() {
        assert_eq!("db2".parse::<SamplerKind>().unwrap(), SamplerKind::Db2);
        assert!(matches!(
            "vdm".parse::<SamplerKind>(),
            Err(Error::UnknownSampler(_))
        ));
        assert_eq!(
            parse_samplers("ope,iid,ope").unwrap(),
            vec![SamplerKind::Iid, SamplerKind::Ope]
        );
        assert_eq!(parse_samplers("all").unwrap().len(), 4);
    }

    #[test]
    fn dyadic_ranks() {
        assert_eq!(dyadic_scale(64, 2), Some(3));
        assert_eq!(dyadic_scale(32, 2), None);
        assert_eq!(dyadic_scale(1, 1), Some(0));
        assert!(kernel_for_rank(SamplerKind::Haar, 2, 32).is_err());
        assert_eq!(kernel_for_rank(SamplerKind::Db2, 2, 16).unwrap().rank(), 16);
        assert_eq!(parse_list("4, 8,16").unwrap(), vec![4, 8, 16]);
        assert!(parse_list("4,x").is_err());
    }
}
