use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::{DiscretePipeline, SamplerKind};
use crate::data::Dataset;
use crate::density::KdeKernel;
use crate::estimators::{coreset_estimate, coreset_estimate_adjusted, kmeans_loss};
use crate::rng::{stream_seed, trial_rng};
use crate::{stats, Error, Result};

#[derive(Debug, Clone)]
pub struct CoresetConfig {
    /// Number of centres in each candidate set.
    pub k: usize,
    pub m_list: Vec<usize>,
    pub samplers: Vec<SamplerKind>,
    /// Independent coresets per (sampler, m).
    pub replicas: usize,
    /// Candidate centre sets over which the relative error is maximized.
    pub candidates: usize,
    pub quantile: f64,
    pub kde: KdeKernel,
    pub seed: u64,
}

impl Default for CoresetConfig {
    fn default() -> Self {
        CoresetConfig {
            k: 3,
            m_list: vec![16, 64, 256],
            samplers: SamplerKind::ALL.to_vec(),
            replicas: 150,
            candidates: 150,
            quantile: 0.9,
            kde: KdeKernel::Epanechnikov,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoresetRow {
    pub sampler: SamplerKind,
    pub m: usize,
    /// Coreset size actually drawn (the numerical rank for DPP samplers).
    pub m_actual: usize,
    pub replicas: usize,
    /// Empirical quantile of the worst-case relative error.
    pub quantile: f64,
    pub mean: f64,
}

impl CoresetRow {
    pub const HEADER: [&'static str; 6] =
        ["sampler", "m", "m_actual", "replicas", "q90", "mean_error"];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.sampler.to_string(),
            self.m.to_string(),
            self.m_actual.to_string(),
            self.replicas.to_string(),
            self.quantile.to_string(),
            self.mean.to_string(),
        ]
    }
}

/// Per candidate set: loss values at every point and their total.
struct Candidates {
    values: Vec<Vec<f64>>,
    totals: Vec<f64>,
    centers: Vec<Vec<Vec<f64>>>,
}

fn draw_candidates(data: &Dataset, k: usize, count: usize, seed: u64) -> Result<Candidates> {
    let n = data.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={n}"
        )));
    }
    let mut rng = trial_rng(stream_seed(seed, "coreset/candidates"), 0);
    let mut values = Vec::with_capacity(count);
    let mut totals = Vec::with_capacity(count);
    let mut centers = Vec::with_capacity(count);
    for _ in 0..count {
        let c: Vec<Vec<f64>> = index::sample(&mut rng, n, k)
            .into_iter()
            .map(|i| data.points[i].clone())
            .collect();
        let f = kmeans_loss(c.clone());
        let v: Vec<f64> = data.points.iter().map(|p| f.eval(p)).collect();
        totals.push(v.iter().sum());
        values.push(v);
        centers.push(c);
    }
    Ok(Candidates {
        values,
        totals,
        centers,
    })
}

/// Worst-case relative k-means error of weighted coresets, summarized by an
/// empirical quantile over independent coresets.
pub fn run_coreset_experiment(data: &Dataset, cfg: &CoresetConfig) -> Result<Vec<CoresetRow>> {
    data.validate()?;
    if cfg.replicas == 0 || cfg.candidates == 0 {
        return Err(Error::InvalidParameter(
            "replicas and candidates must be positive".into(),
        ));
    }
    let n = data.len();
    let cands = draw_candidates(data, cfg.k, cfg.candidates, cfg.seed)?;
    let mut rows = Vec::new();
    let mut samplers = cfg.samplers.clone();
    samplers.sort();
    let mut m_list = cfg.m_list.clone();
    m_list.sort_unstable();
    for &sampler in &samplers {
        for &m in &m_list {
            let stream = stream_seed(cfg.seed, &format!("coreset/{sampler}/{m}"));
            let pipeline = match sampler {
                SamplerKind::Iid => None,
                kind => {
                    let p = DiscretePipeline::with_kde(kind, m, &data.points, cfg.kde)?;
                    Some(p)
                }
            };
            // values of each candidate's loss at the db2 design points
            let design_values: Vec<Vec<f64>> =
                match pipeline.as_ref().and_then(|p| p.design_points()) {
                    Some(dp) => cands
                        .centers
                        .iter()
                        .map(|c| {
                            let f = kmeans_loss(c.clone());
                            dp.points.iter().map(|x| f.eval(x)).collect()
                        })
                        .collect(),
                    None => Vec::new(),
                };
            let m_actual = pipeline.as_ref().map_or(m, |p| p.dpp.rank());
            if m_actual > n {
                return Err(Error::InvalidParameter(format!(
                    "coreset size {m} exceeds N = {n}"
                )));
            }
            let errors: Vec<f64> = (0..cfg.replicas as u64)
                .into_par_iter()
                .map(|r| -> Result<f64> {
                    let mut rng = trial_rng(stream, r);
                    let mut worst = 0.0f64;
                    match &pipeline {
                        None => {
                            let idx: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
                            for (v, &total) in cands.values.iter().zip(&cands.totals) {
                                let est =
                                    idx.iter().map(|&i| v[i]).sum::<f64>() * n as f64 / m as f64;
                                worst = worst.max((est - total).abs() / total.abs());
                            }
                        }
                        Some(p) => {
                            let idx = p.dpp.sample(&mut rng)?;
                            for (c, (v, &total)) in
                                cands.values.iter().zip(&cands.totals).enumerate()
                            {
                                let est = if p.control.is_some() {
                                    let g = &design_values[c];
                                    let mut control = vec![0.0; n];
                                    for &i in &idx {
                                        control[i] = p.control_at(i, g);
                                    }
                                    coreset_estimate_adjusted(
                                        &idx,
                                        &p.dpp,
                                        v,
                                        &control,
                                        p.control_total(g),
                                    )?
                                } else {
                                    coreset_estimate(&idx, &p.dpp, v)?
                                };
                                worst = worst.max((est - total).abs() / total.abs());
                            }
                        }
                    }
                    Ok(worst)
                })
                .collect::<Result<_>>()?;
            rows.push(CoresetRow {
                sampler,
                m,
                m_actual,
                replicas: cfg.replicas,
                quantile: stats::quantile(&errors, cfg.quantile),
                mean: stats::mean(&errors),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_gmm_trimodal;

    #[test]
    fn small_run_is_reproducible() {
        let data = gen_gmm_trimodal(300, 1).unwrap();
        let cfg = CoresetConfig {
            m_list: vec![16],
            replicas: 20,
            candidates: 10,
            seed: 5,
            ..CoresetConfig::default()
        };
        let a = run_coreset_experiment(&data, &cfg).unwrap();
        let b = run_coreset_experiment(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        for row in &a {
            assert!(row.quantile.is_finite() && row.quantile >= 0.0);
            assert!(row.m_actual <= 16);
        }
    }

    #[test]
    fn bad_k() {
        let data = gen_gmm_trimodal(30, 1).unwrap();
        let cfg = CoresetConfig {
            k: 0,
            ..CoresetConfig::default()
        };
        assert!(run_coreset_experiment(&data, &cfg).is_err());
    }
}
