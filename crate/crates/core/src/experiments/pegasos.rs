use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{DiscretePipeline, SamplerKind};
use crate::data::{Dataset, Rescale, RESCALE_MARGIN};
use crate::density::KdeKernel;
use crate::rng::{stream_seed, trial_rng};
use crate::{stats, Error, Result};

/// Linear SVM without intercept: `min_θ λ/2 ‖θ‖² + (1/N) Σ max(0, 1 − y_i ⟨θ, x_i⟩)`.
#[derive(Debug, Clone)]
pub struct SvmProblem {
    pub x: Vec<Vec<f64>>,
    /// Labels in `{−1, +1}`.
    pub y: Vec<f64>,
    pub lambda: f64,
}

impl SvmProblem {
    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, |p| p.len())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub fn hinge_objective(theta: &[f64], p: &SvmProblem) -> f64 {
    let loss: f64 =
        p.x.iter()
            .zip(&p.y)
            .map(|(x, y)| (1.0 - y * dot(theta, x)).max(0.0))
            .sum();
    0.5 * p.lambda * dot(theta, theta) + loss / p.len() as f64
}

/// `λθ − (1/N) Σ 1{y_i ⟨θ, x_i⟩ < 1} y_i x_i`.
pub fn full_subgradient(theta: &[f64], p: &SvmProblem) -> Vec<f64> {
    let mut g: Vec<f64> = theta.iter().map(|t| p.lambda * t).collect();
    let scale = 1.0 / p.len() as f64;
    for (x, &y) in p.x.iter().zip(&p.y) {
        if y * dot(theta, x) < 1.0 {
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi -= scale * y * xi;
            }
        }
    }
    g
}

/// Fraction of points with `y ⟨θ, x⟩ ≤ 0`.
pub fn test_error(theta: &[f64], x: &[Vec<f64>], y: &[f64]) -> f64 {
    let wrong = x
        .iter()
        .zip(y)
        .filter(|(xi, &yi)| yi * dot(theta, xi) <= 0.0)
        .count();
    wrong as f64 / x.len().max(1) as f64
}

/// Deterministic full-batch subgradient descent with `η_t = 1/(λt)` from
/// `θ = 0`, stopped when an update moves `θ` by less than `tol` or after
/// `max_iter` steps. Returns whichever of the best iterate and the average
/// of the second half of the iterates has the lower objective.
pub fn reference_solution(p: &SvmProblem, tol: f64, max_iter: usize) -> Vec<f64> {
    let d = p.dim();
    let mut theta = vec![0.0; d];
    let mut best = theta.clone();
    let mut best_obj = hinge_objective(&theta, p);
    let mut avg = vec![0.0; d];
    let mut avg_count = 0usize;
    for t in 1..=max_iter {
        let g = full_subgradient(&theta, p);
        let eta = 1.0 / (p.lambda * t as f64);
        let mut moved = 0.0;
        for (th, gi) in theta.iter_mut().zip(&g) {
            *th -= eta * gi;
            moved += (eta * gi).powi(2);
        }
        let obj = hinge_objective(&theta, p);
        if obj < best_obj {
            best_obj = obj;
            best.clone_from(&theta);
        }
        if t > max_iter / 2 {
            avg_count += 1;
            for (a, th) in avg.iter_mut().zip(&theta) {
                *a += (th - *a) / avg_count as f64;
            }
        }
        if moved.sqrt() < tol {
            break;
        }
    }
    if avg_count > 0 && hinge_objective(&avg, p) < best_obj {
        avg
    } else {
        best
    }
}

/// One class of the training set with its own minibatch sampler.
#[derive(Debug, Clone)]
pub struct ClassBlock {
    pub label: f64,
    /// Indices into the training problem.
    pub indices: Vec<usize>,
    /// Class-wise map from raw features into `[0.02, 0.98]^d`.
    pub rescale: Rescale,
    pub pipeline: Option<DiscretePipeline>,
}

/// How a minibatch is turned into a subgradient estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinibatchWeighting {
    /// `(1/|S|) Σ_{i∈S} …` over the union of the per-class minibatches,
    /// as in the usual Pegasos update. Unbiased for iid sampling from
    /// balanced classes; for a DPP it targets a density-flattened version of
    /// the full subgradient.
    #[default]
    Average,
    /// Inclusion-probability weights `1/(K_ii N_c)` per class, classes
    /// weighted by `N_c/N`: unbiased for every sampler.
    HorvitzThompson,
}

impl std::str::FromStr for MinibatchWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" | "avg" => Ok(MinibatchWeighting::Average),
            "ht" | "horvitz-thompson" => Ok(MinibatchWeighting::HorvitzThompson),
            _ => Err(Error::InvalidParameter(format!("unknown weighting `{s}`"))),
        }
    }
}

/// Per-class minibatches; DPP samplers use the discrete pipeline on each
/// class separately. db2 always uses the control-variate statistic, divided
/// by the class size.
#[derive(Debug, Clone)]
pub struct MinibatchSampler {
    pub kind: SamplerKind,
    pub m_per_class: usize,
    pub weighting: MinibatchWeighting,
    pub classes: Vec<ClassBlock>,
}

impl MinibatchSampler {
    pub fn new(
        kind: SamplerKind,
        p: &SvmProblem,
        m_per_class: usize,
        kde: KdeKernel,
    ) -> Result<Self> {
        let mut labels: Vec<f64> = p.y.clone();
        labels.sort_by(f64::total_cmp);
        labels.dedup();
        let mut classes = Vec::with_capacity(labels.len());
        for &label in &labels {
            let indices: Vec<usize> = (0..p.len()).filter(|&i| p.y[i] == label).collect();
            if indices.len() < m_per_class {
                return Err(Error::InvalidParameter(format!(
                    "class {label} has {} points, fewer than the minibatch size {m_per_class}",
                    indices.len()
                )));
            }
            let raw: Vec<Vec<f64>> = indices.iter().map(|&i| p.x[i].clone()).collect();
            let rescale = Rescale::min_max(&raw, RESCALE_MARGIN.0, RESCALE_MARGIN.1)?;
            let pipeline = match kind {
                SamplerKind::Iid => None,
                k => {
                    let pts: Vec<Vec<f64>> = raw.iter().map(|r| rescale.apply(r)).collect();
                    Some(DiscretePipeline::with_kde(k, m_per_class, &pts, kde)?)
                }
            };
            classes.push(ClassBlock {
                label,
                indices,
                rescale,
                pipeline,
            });
        }
        Ok(MinibatchSampler {
            kind,
            m_per_class,
            weighting: MinibatchWeighting::default(),
            classes,
        })
    }

    pub fn with_weighting(mut self, weighting: MinibatchWeighting) -> Self {
        self.weighting = weighting;
        self
    }

    /// Minibatch estimate of [`full_subgradient`]; unbiased under
    /// [`MinibatchWeighting::HorvitzThompson`].
    pub fn subgradient<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        p: &SvmProblem,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let d = p.dim();
        let n_total = p.len() as f64;
        let active = |x: &[f64], y: f64| y * dot(theta, x) < 1.0;
        // per class: estimate of the class-mean hinge term and minibatch size
        let mut parts: Vec<(f64, Vec<f64>, usize)> = Vec::with_capacity(self.classes.len());
        for class in &self.classes {
            let nc = class.indices.len() as f64;
            let mut est = vec![0.0; d];
            let size;
            match &class.pipeline {
                None => {
                    for _ in 0..self.m_per_class {
                        let i = class.indices[rng.random_range(0..class.indices.len())];
                        if active(&p.x[i], p.y[i]) {
                            for (e, xi) in est.iter_mut().zip(&p.x[i]) {
                                *e += p.y[i] * xi / self.m_per_class as f64;
                            }
                        }
                    }
                    size = self.m_per_class;
                }
                Some(pipe) => {
                    let selected = pipe.dpp.sample(rng)?;
                    size = selected.len();
                    // per-coordinate control variates from the design points
                    let design: Option<Vec<Vec<f64>>> = pipe.design_points().map(|dp| {
                        let vals: Vec<Vec<f64>> = dp
                            .points
                            .iter()
                            .map(|z| {
                                let raw = class.rescale.invert(z);
                                if active(&raw, class.label) {
                                    raw.iter().map(|r| class.label * r).collect()
                                } else {
                                    vec![0.0; d]
                                }
                            })
                            .collect();
                        (0..d)
                            .map(|a| vals.iter().map(|v| v[a]).collect())
                            .collect()
                    });
                    let weighted =
                        design.is_some() || self.weighting == MinibatchWeighting::HorvitzThompson;
                    if let Some(gs) = &design {
                        for (a, ga) in gs.iter().enumerate() {
                            est[a] += pipe.control_total(ga) / nc;
                        }
                    }
                    for &local in &selected {
                        let i = class.indices[local];
                        let on = active(&p.x[i], p.y[i]);
                        let w = if weighted {
                            let k = pipe.dpp.inclusion_probabilities()[local];
                            if !(k > 0.0) {
                                return Err(Error::ZeroDiagonal { index: local });
                            }
                            1.0 / (k * nc)
                        } else {
                            1.0 / size as f64
                        };
                        for a in 0..d {
                            let h = if on { p.y[i] * p.x[i][a] } else { 0.0 };
                            let c = design
                                .as_ref()
                                .map_or(0.0, |gs| pipe.control_at(local, &gs[a]));
                            est[a] += (h - c) * w;
                        }
                    }
                }
            }
            parts.push((nc, est, size));
        }
        let batch: usize = parts.iter().map(|(_, _, s)| s).sum();
        let mut g: Vec<f64> = theta.iter().map(|t| p.lambda * t).collect();
        for (nc, est, size) in &parts {
            let share = match self.weighting {
                MinibatchWeighting::Average => *size as f64 / batch.max(1) as f64,
                MinibatchWeighting::HorvitzThompson => nc / n_total,
            };
            for (gi, e) in g.iter_mut().zip(est) {
                *gi -= share * e;
            }
        }
        Ok(g)
    }
}

/// Trace of the covariance of the minibatch subgradient at a fixed `θ`,
/// estimated from `draws` independent minibatches.
pub fn subgradient_trace_variance<R: Rng + ?Sized>(
    sampler: &MinibatchSampler,
    p: &SvmProblem,
    theta: &[f64],
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if draws < 2 {
        return Err(Error::InvalidParameter("need at least 2 draws".into()));
    }
    let gs: Vec<Vec<f64>> = (0..draws)
        .map(|_| sampler.subgradient(theta, p, rng))
        .collect::<Result<_>>()?;
    Ok((0..theta.len())
        .map(|a| stats::variance(&gs.iter().map(|g| g[a]).collect::<Vec<_>>()))
        .sum())
}

#[derive(Debug, Clone)]
pub struct PegasosConfig {
    pub samplers: Vec<SamplerKind>,
    pub m_per_class: usize,
    pub iterations: usize,
    pub lambda: f64,
    pub trials: usize,
    pub train_fraction: f64,
    pub kde: KdeKernel,
    pub weighting: MinibatchWeighting,
    pub seed: u64,
    pub reference_tol: f64,
    pub reference_iterations: usize,
}

impl Default for PegasosConfig {
    fn default() -> Self {
        PegasosConfig {
            samplers: SamplerKind::ALL.to_vec(),
            m_per_class: 16,
            iterations: 200,
            lambda: 0.1,
            trials: 100,
            train_fraction: 0.7,
            kde: KdeKernel::Gaussian,
            weighting: MinibatchWeighting::Average,
            seed: 0,
            reference_tol: 1e-8,
            reference_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PegasosRow {
    pub sampler: SamplerKind,
    pub t: usize,
    pub metric: &'static str,
    pub value: f64,
    pub stderr: f64,
}

impl PegasosRow {
    pub const HEADER: [&'static str; 5] = ["sampler", "t", "metric", "value", "stderr"];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.sampler.to_string(),
            self.t.to_string(),
            self.metric.to_string(),
            self.value.to_string(),
            self.stderr.to_string(),
        ]
    }
}

const METRICS: [&str; 4] = ["objective", "param_error", "subgradient_norm", "test_error"];

/// Splits a labelled two-class dataset into train and test problems. The
/// smaller label becomes `−1`; features are the dataset's source
/// coordinates (the inverse of its rescale record).
pub fn split_problem(
    data: &Dataset,
    train_fraction: f64,
    lambda: f64,
    seed: u64,
) -> Result<(SvmProblem, SvmProblem)> {
    let labels = data
        .labels
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("Pegasos needs labels".into()))?;
    let mut distinct = labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "Pegasos needs exactly two classes, found {}",
            distinct.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut trial_rng(stream_seed(seed, "pegasos/split"), 0));
    let n_train = ((data.len() as f64) * train_fraction).round() as usize;
    let make = |idx: &[usize]| SvmProblem {
        x: idx
            .iter()
            .map(|&i| data.rescale.invert(&data.points[i]))
            .collect(),
        y: idx
            .iter()
            .map(|&i| if labels[i] == distinct[0] { -1.0 } else { 1.0 })
            .collect(),
        lambda,
    };
    Ok((make(&order[..n_train]), make(&order[n_train..])))
}

pub fn run_pegasos_experiment(data: &Dataset, cfg: &PegasosConfig) -> Result<Vec<PegasosRow>> {
    if cfg.trials == 0 || cfg.iterations == 0 {
        return Err(Error::InvalidParameter(
            "trials and iterations must be positive".into(),
        ));
    }
    let (train, test) = split_problem(data, cfg.train_fraction, cfg.lambda, cfg.seed)?;
    let theta_star = reference_solution(&train, cfg.reference_tol, cfg.reference_iterations);
    let mut samplers = cfg.samplers.clone();
    samplers.sort();
    let mut rows = Vec::new();
    for &kind in &samplers {
        let sampler = MinibatchSampler::new(kind, &train, cfg.m_per_class, cfg.kde)?
            .with_weighting(cfg.weighting);
        let stream = stream_seed(cfg.seed, &format!("pegasos/{kind}"));
        // traces[trial][t][metric]
        let traces: Vec<Vec<[f64; 4]>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| -> Result<Vec<[f64; 4]>> {
                let mut rng = trial_rng(stream, trial);
                let mut theta = vec![0.0; train.dim()];
                let mut out = Vec::with_capacity(cfg.iterations);
                for t in 1..=cfg.iterations {
                    let g = sampler.subgradient(&theta, &train, &mut rng)?;
                    let eta = 1.0 / (cfg.lambda * t as f64);
                    theta
                        .iter_mut()
                        .zip(&g)
                        .for_each(|(th, gi)| *th -= eta * gi);
                    let full = full_subgradient(&theta, &train);
                    let param_err = theta
                        .iter()
                        .zip(&theta_star)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    out.push([
                        hinge_objective(&theta, &train),
                        param_err,
                        full.iter().map(|v| v * v).sum::<f64>().sqrt(),
                        test_error(&theta, &test.x, &test.y),
                    ]);
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for t in 0..cfg.iterations {
            for (mi, metric) in METRICS.iter().enumerate() {
                let vals: Vec<f64> = traces.iter().map(|tr| tr[t][mi]).collect();
                let stderr = if vals.len() > 1 {
                    stats::standard_error(&vals)
                } else {
                    0.0
                };
                rows.push(PegasosRow {
                    sampler: kind,
                    t: t + 1,
                    metric,
                    value: stats::mean(&vals),
                    stderr,
                });
            }
        }
    }
    Ok(rows)
}
