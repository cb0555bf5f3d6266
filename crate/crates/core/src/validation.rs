//! Self-check suites behind `dppss validate`.
//!
//! Each check compares an implementation against an independent reference
//! (brute-force enumeration, adaptive quadrature, a closed form) and reports
//! a pass/fail line. With [`ValidationOptions::tamper`] set, the samplers are
//! swapped for deliberately biased ones so that the suites can be seen to
//! fail: uniforms inside each dyadic cell are squared, and the discrete
//! sampler picks indices sequentially in proportion to the kernel diagonal
//! instead of following the DPP.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;

use crate::continuous_sampler::{sample, sample_projection_chain, ChainConfig, ContinuousSample};
use crate::data::uniform_points;
use crate::density::{relative_error_diagnostic, DensityEstimate, KdeKernel};
use crate::discretize::{error_functional, DiscreteProjectionDpp, TransferBoundInputs};
use crate::estimators::{
    biweight_bump, constant_one, discrete_variance_exact, gamma_function, quadrature_adjusted,
    quadrature_basic, DesignPoints, DesignRule, TestFunction,
};
use crate::experiments::{
    kernel_for_rank, run_quadrature_experiment, DiscretePipeline, QuadratureConfig, SamplerKind,
    WeightChoice, BUMP_RADIUS,
};
use crate::kernels::{IndexMode, ProjectionKernel};
use crate::oracle::{enumerate_subset_probabilities, tv_distance, SubsetFrequencies};
use crate::rng::{stream_seed, trial_rng};
use crate::wavelets::{daubechies2_filter, dilated, ScalingFunction};
use crate::{stats, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Oracle,
    Stratified,
    Unbiasedness,
    Partition,
    Transfer,
    Slopes,
    Formulas,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Oracle,
        Suite::Stratified,
        Suite::Unbiasedness,
        Suite::Partition,
        Suite::Transfer,
        Suite::Slopes,
        Suite::Formulas,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Stratified => "stratified",
            Suite::Unbiasedness => "unbiasedness",
            Suite::Partition => "partition",
            Suite::Transfer => "transfer",
            Suite::Slopes => "slopes",
            Suite::Formulas => "formulas",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.label())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{s}`")))
    }
}

/// Parses `all` or a comma-separated list of suite names.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s.trim() == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    let mut out: Vec<Suite> = s
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Effort {
    /// Sizes of the acceptance criteria.
    #[default]
    Full,
    /// Roughly a tenth of the Monte Carlo work, for smoke runs.
    Quick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidationOptions {
    pub seed: u64,
    pub tamper: bool,
    pub effort: Effort,
}

impl ValidationOptions {
    fn scaled(&self, full: usize) -> usize {
        match self.effort {
            Effort::Full => full,
            Effort::Quick => (full / 10).max(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>, passed: bool, detail: String) -> Self {
        Check {
            suite,
            name: name.into(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub const HEADER: [&'static str; 4] = ["suite", "check", "status", "detail"];

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.suite.to_string(),
                    c.name.clone(),
                    if c.passed { "pass" } else { "fail" }.to_string(),
                    c.detail.clone(),
                ]
            })
            .collect()
    }
}

/// Runs the selected suites in order.
pub fn run_validation(suites: &[Suite], opts: &ValidationOptions) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for &suite in suites {
        let found = match suite {
            Suite::Oracle => vec![oracle_check(opts)?],
            Suite::Stratified => stratified_checks(opts)?,
            Suite::Unbiasedness => unbiasedness_checks(opts)?,
            Suite::Partition => partition_checks()?,
            Suite::Transfer => transfer_checks(opts)?,
            Suite::Slopes => slope_checks(opts)?,
            Suite::Formulas => formula_checks()?,
        };
        checks.extend(found);
    }
    Ok(ValidationReport { checks })
}

/// Squares the position of every coordinate inside its dyadic cell of
/// width `2^{-scale}`: a biased stand-in for a correct sampler.
pub fn tamper_continuous(sample: &mut ContinuousSample, scale: u32) {
    let side = (1u64 << scale) as f64;
    for p in &mut sample.points {
        for c in p.iter_mut() {
            let cell = (*c * side).floor();
            let u = *c * side - cell;
            *c = (cell + u * u) / side;
        }
    }
}

/// Draws `rank` distinct indices one at a time with probability
/// proportional to `K_ii`. Same marginal intent, wrong joint law.
pub fn tampered_discrete_sample<R: Rng + ?Sized>(
    dpp: &DiscreteProjectionDpp,
    rng: &mut R,
) -> Vec<usize> {
    let mut w: Vec<f64> = dpp.inclusion_probabilities().to_vec();
    let mut out = Vec::with_capacity(dpp.rank());
    for _ in 0..dpp.rank() {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            break;
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = w.len() - 1;
        for (i, &wi) in w.iter().enumerate() {
            if u < wi {
                pick = i;
                break;
            }
            u -= wi;
        }
        w[pick] = 0.0;
        out.push(pick);
    }
    out.sort_unstable();
    out
}

/// Enumeration against sampling for `N = 6` uniform points, Haar `j = 1`.
pub fn oracle_check(opts: &ValidationOptions) -> Result<Check> {
    let start = Instant::now();
    let mut rng = trial_rng(stream_seed(opts.seed, "validate/oracle"), 0);
    let points = uniform_points(6, 1, &mut rng);
    let pipe = DiscretePipeline::build(SamplerKind::Haar, 2, &points, &[1.0; 6])?;
    let table = enumerate_subset_probabilities(&pipe.dpp)?;
    let draws = opts.scaled(100_000);
    let mut counts = std::collections::BTreeMap::<Vec<usize>, usize>::new();
    for _ in 0..draws {
        let s = if opts.tamper {
            tampered_discrete_sample(&pipe.dpp, &mut rng)
        } else {
            pipe.dpp.sample(&mut rng)?
        };
        *counts.entry(s).or_default() += 1;
    }
    let freqs = SubsetFrequencies {
        freqs: counts
            .into_iter()
            .map(|(s, c)| (s, c as f64 / draws as f64))
            .collect(),
        trials: draws,
    };
    let q = table.align(&freqs)?;
    let tv = tv_distance(&table.probs, &q)?;
    let total = table.total();
    let secs = start.elapsed().as_secs_f64();
    Ok(Check::new(
        Suite::Oracle,
        "n6-haar-j1",
        tv < 0.01 && (total - 1.0).abs() < 1e-9,
        format!(
            "{} subsets, sum {total:.12}, TV {tv:.5} over {draws} draws, {secs:.2}s",
            table.subsets.len()
        ),
    ))
}

/// Haar `j = 2`, `d = 1` drawn through the generic chain sampler: one point
/// per quarter cell, uniform inside the cell.
pub fn stratified_checks(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let kernel = ProjectionKernel::wavelet(ScalingFunction::haar(), 2, 1, IndexMode::Interior)?;
    let mut rng = trial_rng(stream_seed(opts.seed, "validate/stratified"), 0);
    let draws = opts.scaled(10_000);
    let mut violations = 0usize;
    let mut within = Vec::with_capacity(4 * draws);
    for _ in 0..draws {
        let mut s = sample_projection_chain(&kernel, &mut rng, &ChainConfig::default())?;
        if opts.tamper {
            tamper_continuous(&mut s, 2);
        }
        let mut seen = [0usize; 4];
        for p in s.iter() {
            let v = 4.0 * p[0];
            let cell = (v.floor() as usize).min(3);
            seen[cell] += 1;
            within.push(v - cell as f64);
        }
        if seen.iter().any(|&c| c != 1) {
            violations += 1;
        }
    }
    let ks = stats::ks_uniform(&within);
    let crit = stats::ks_critical(within.len(), 0.01);
    Ok(vec![
        Check::new(
            Suite::Stratified,
            "one-point-per-cell",
            violations == 0,
            format!("{violations} violations in {draws} samples"),
        ),
        Check::new(
            Suite::Stratified,
            "within-cell-ks",
            ks < crit,
            format!("KS {ks:.5} vs 1% critical value {crit:.5}"),
        ),
    ])
}

/// Monte Carlo mean of a quadrature estimator against the truth.
pub fn unbiasedness_check(
    sampler: SamplerKind,
    n: usize,
    f: &TestFunction,
    omega: &TestFunction,
    trials: usize,
    opts: &ValidationOptions,
) -> Result<Check> {
    let kernel = kernel_for_rank(sampler, f.dim(), n)?;
    let scale = kernel.wavelet_index().map_or(0, |(_, idx)| idx.scale);
    let design = match sampler {
        SamplerKind::Db2 => Some(DesignPoints::new(&kernel, DesignRule::default())?),
        _ => None,
    };
    let truth = f.integral_against(omega)?;
    let stream = stream_seed(opts.seed, &format!("validate/unbiased/{sampler}"));
    let est: Vec<f64> = (0..trials as u64)
        .map(|t| {
            let mut rng = trial_rng(stream, t);
            let mut s = sample(&kernel, &mut rng)?;
            if opts.tamper {
                tamper_continuous(&mut s, scale);
            }
            match &design {
                Some(dp) => quadrature_adjusted(&s, &kernel, f, omega, dp),
                None => quadrature_basic(&s, &kernel, f, omega),
            }
        })
        .collect::<Result<_>>()?;
    let mean = stats::mean(&est);
    let se = stats::standard_error(&est);
    let z = (mean - truth) / se;
    let estimator = if design.is_some() {
        "adjusted"
    } else {
        "basic"
    };
    Ok(Check::new(
        Suite::Unbiasedness,
        format!("{sampler}-{estimator}-{}-n{n}", f.name()),
        z.abs() < 3.0,
        format!("mean {mean:.6} truth {truth:.6} se {se:.2e} z {z:.2} over {trials} trials"),
    ))
}

pub fn unbiasedness_checks(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let f = gamma_function(0.75, 1);
    let trials = opts.scaled(10_000);
    Ok(vec![
        unbiasedness_check(SamplerKind::Haar, 16, &f, &constant_one(1), trials, opts)?,
        unbiasedness_check(
            SamplerKind::Db2,
            16,
            &f,
            &biweight_bump(1, BUMP_RADIUS),
            trials,
            opts,
        )?,
    ])
}

/// `Σ_k 2^{-dj/2} Φ_{j,k}(x)` over the index set, its largest deviation
/// from 1 on a grid.
pub fn partition_deviation(kernel: &ProjectionKernel, grid: &[Vec<f64>]) -> Result<f64> {
    let scale = kernel
        .wavelet_index()
        .map(|(_, idx)| idx.scale)
        .ok_or_else(|| {
            Error::InvalidParameter("partition of unity needs a wavelet kernel".into())
        })?;
    let w = (-(scale as f64) * kernel.dim() as f64 / 2.0).exp2();
    let mut feat = Vec::new();
    let mut worst = 0.0f64;
    for x in grid {
        kernel.sparse_features(x, &mut feat)?;
        let s: f64 = feat.iter().map(|(_, v)| v).sum::<f64>() * w;
        worst = worst.max((s - 1.0).abs());
    }
    Ok(worst)
}

pub fn partition_checks() -> Result<Vec<Check>> {
    // 1001 interior points of (0, 1)
    let line: Vec<Vec<f64>> = (1..=1001).map(|i| vec![i as f64 / 1002.0]).collect();
    let square: Vec<Vec<f64>> = (1..=101)
        .flat_map(|a| (1..=101).map(move |b| vec![a as f64 / 102.0, b as f64 / 102.0]))
        .collect();
    let haar = ProjectionKernel::wavelet(ScalingFunction::haar(), 4, 1, IndexMode::Interior)?;
    let haar2 = ProjectionKernel::wavelet(ScalingFunction::haar(), 3, 2, IndexMode::Interior)?;
    let db2 = ScalingFunction::daubechies2()?;
    let per = ProjectionKernel::wavelet(db2.clone(), 4, 1, IndexMode::Periodized)?;
    let per2 = ProjectionKernel::wavelet(db2.clone(), 3, 2, IndexMode::Periodized)?;
    // the same sum through the scalar dilation routine
    let direct = line
        .iter()
        .map(|x| {
            let s: f64 = (0..16).map(|k| dilated(&db2, 4, k, x[0], true)).sum();
            (s * 0.25 - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let mut out = Vec::new();
    for (name, kernel, grid, tol) in [
        ("haar-j4-d1", &haar, &line, 1e-12),
        ("haar-j3-d2", &haar2, &square, 1e-12),
        ("db2-periodized-j4-d1", &per, &line, 1e-4),
        ("db2-periodized-j3-d2", &per2, &square, 1e-4),
    ] {
        let dev = partition_deviation(kernel, grid)?;
        out.push(Check::new(
            Suite::Partition,
            name,
            dev < tol,
            format!(
                "max |Σφ − 1| = {dev:.2e} on {} points (tol {tol:.0e})",
                grid.len()
            ),
        ));
    }
    out.push(Check::new(
        Suite::Partition,
        "db2-periodized-j4-scalar-path",
        direct < 1e-4,
        format!("max |Σφ − 1| = {direct:.2e}"),
    ));
    Ok(out)
}

/// Outcome of the variance-transfer comparison on one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferOutcome {
    pub variance: f64,
    pub lower: f64,
    pub upper: f64,
    /// `max_i |ρ(X_i)/ρ̂(X_i) − 1|`; zero with the true density.
    pub epsilon: f64,
}

impl TransferOutcome {
    pub fn inside(&self) -> bool {
        self.variance >= self.lower && self.variance <= self.upper
    }
}

/// Conditional variance of `Σ_{i∈S} X_i` for Haar `j = 2` on `big_n`
/// uniform points, with bounds built from `V_c = 1/48`, `K_max = 4`,
/// `‖f‖_∞ = 1` and `𝓔(4, N, 0.05, 0.05)`. `kde = None` uses the true
/// density; with a KDE the bounds widen by `(1±ε)²`, the larger error
/// multipliers and the `ε² n` terms.
pub fn transfer_outcome(
    big_n: usize,
    seed: u64,
    kde: Option<KdeKernel>,
) -> Result<TransferOutcome> {
    let v_c = 1.0 / 48.0;
    let k_max: f64 = 4.0;
    let n = 4usize;
    let (e, _) = error_functional(&TransferBoundInputs {
        n,
        big_n: big_n as f64,
        delta: 0.05,
        delta_prime: 0.05,
    })?;
    let mut rng = trial_rng(seed, 0);
    let points = uniform_points(big_n, 1, &mut rng);
    let values: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let (pipe, epsilon) = match kde {
        None => (
            DiscretePipeline::build(SamplerKind::Haar, n, &points, &vec![1.0; big_n])?,
            0.0,
        ),
        Some(kernel) => {
            let est = DensityEstimate::fit(&points, kernel)?;
            let eps = relative_error_diagnostic(&est, |_| 1.0, &points)?;
            let pipe = DiscretePipeline::build(SamplerKind::Haar, n, &points, &est.eval_at_data())?;
            (pipe, eps)
        }
    };
    let variance = discrete_variance_exact(&pipe.dpp, &values)?;
    let k2e = k_max * k_max * e;
    let (lower, upper) = match kde {
        None => (0.45 * v_c - 4.0 * k2e, 2.05 * v_c + 4.0 * k2e),
        Some(_) => {
            let en = epsilon * epsilon * n as f64;
            (
                0.45 * (1.0 - epsilon).powi(2) * v_c - 16.0 * k2e - 4.0 * en,
                2.05 * (1.0 + epsilon).powi(2) * v_c + 32.0 * k2e + 8.0 * en,
            )
        }
    };
    Ok(TransferOutcome {
        variance,
        lower,
        upper,
        epsilon,
    })
}

pub fn transfer_checks(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let datasets = 20u64;
    let big_n = opts.scaled(10_000);
    let mut out = Vec::new();
    for (name, kde) in [
        ("true-density", None),
        ("epanechnikov-kde", Some(KdeKernel::Epanechnikov)),
    ] {
        let mut inside = 0;
        let mut vars = Vec::new();
        let mut eps = 0.0f64;
        let mut bounds = (f64::NAN, f64::NAN);
        for d in 0..datasets {
            let o = transfer_outcome(
                big_n,
                stream_seed(opts.seed, &format!("validate/transfer/{d}")),
                kde,
            )?;
            inside += o.inside() as usize;
            vars.push(o.variance);
            eps = eps.max(o.epsilon);
            bounds = (o.lower, o.upper);
        }
        out.push(Check::new(
            Suite::Transfer,
            format!("haar-j2-{name}"),
            inside >= 19,
            format!(
                "{inside}/{datasets} inside [{:.4}, {:.4}]; variance range [{:.5}, {:.5}], V_c = {:.5}, max ε {eps:.3}",
                bounds.0,
                bounds.1,
                vars.iter().cloned().fold(f64::INFINITY, f64::min),
                vars.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                1.0 / 48.0
            ),
        ));
    }
    Ok(out)
}

/// A fitted MSE slope against a target and tolerance.
pub fn slope_check(
    sampler: SamplerKind,
    dim: usize,
    function: &str,
    n_list: Vec<usize>,
    target: f64,
    tol: f64,
    opts: &ValidationOptions,
) -> Result<Check> {
    let cfg = QuadratureConfig {
        sampler,
        dim,
        function: function.to_string(),
        weight: WeightChoice::Auto,
        design: DesignRule::default(),
        n_list,
        trials: opts.scaled(400),
        seed: stream_seed(
            opts.seed,
            &format!("validate/slope/{sampler}/{dim}/{function}"),
        ),
    };
    let summary = run_quadrature_experiment(&cfg)?;
    let ns: Vec<String> = summary.rows.iter().map(|r| r.n.to_string()).collect();
    Ok(Check::new(
        Suite::Slopes,
        format!("{sampler}-d{dim}-{function}"),
        (summary.slope - target).abs() <= tol,
        format!(
            "slope {:.3}, target {target} ± {tol}, n ∈ {{{}}}, {} trials",
            summary.slope,
            ns.join(","),
            cfg.trials
        ),
    ))
}

pub fn slope_checks(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let d1: Vec<usize> = (2..=8).map(|j| 1usize << j).collect();
    let d2: Vec<usize> = (1..=4).map(|j| 1usize << (2 * j)).collect();
    let db2: Vec<usize> = (2..=7).map(|j| 1usize << j).collect();
    Ok(vec![
        slope_check(
            SamplerKind::Haar,
            1,
            "gamma0.25",
            d1.clone(),
            -1.5,
            0.3,
            opts,
        )?,
        slope_check(
            SamplerKind::Haar,
            1,
            "gamma0.75",
            d1.clone(),
            -2.5,
            0.3,
            opts,
        )?,
        slope_check(SamplerKind::Iid, 1, "gamma0.75", d1, -1.0, 0.2, opts)?,
        slope_check(SamplerKind::Haar, 2, "gamma0.75", d2, -1.75, 0.3, opts)?,
        slope_check(SamplerKind::Db2, 1, "gamma0.75", db2, -2.5, 0.35, opts)?,
    ])
}

pub fn formula_checks() -> Result<Vec<Check>> {
    let inp = |big_n: f64, delta: f64| TransferBoundInputs {
        n: 4,
        big_n,
        delta,
        delta_prime: delta,
    };
    let (e, _) = error_functional(&inp(1e4, 0.1))?;
    let grid: Vec<f64> = (2..=8).map(|k| 10f64.powi(k)).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&n| error_functional(&inp(n, 0.1)).map(|v| v.0))
        .collect::<Result<_>>()?;
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let h = daubechies2_filter();
    let sum_err = (h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs();
    let ortho_err = (0..2)
        .map(|m| {
            let s: f64 = (0..h.len())
                .filter(|k| k + 2 * m < h.len())
                .map(|k| h[k] * h[k + 2 * m])
                .sum();
            (s - if m == 0 { 1.0 } else { 0.0 }).abs()
        })
        .fold(0.0, f64::max);
    Ok(vec![
        Check::new(
            Suite::Formulas,
            "error-functional-reference",
            (e - 0.1).abs() < 5e-4,
            format!("E(4, 1e4, 0.1, 0.1) = {e:.7}"),
        ),
        Check::new(
            Suite::Formulas,
            "error-functional-decreasing",
            decreasing,
            format!("N = 1e2..1e8: {values:.4?}"),
        ),
        Check::new(
            Suite::Formulas,
            "db2-filter-identities",
            sum_err < 1e-12 && ortho_err < 1e-12,
            format!("|Σh − √2| = {sum_err:.1e}, max double-shift error {ortho_err:.1e}"),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!(parse_suites("all").unwrap().len(), Suite::ALL.len());
        assert_eq!(
            parse_suites("slopes,oracle").unwrap(),
            vec![Suite::Oracle, Suite::Slopes]
        );
        assert!(parse_suites("oracle,nope").is_err());
    }

    #[test]
    fn oracle_passes_and_tamper_fails() {
        let opts = ValidationOptions::default();
        let ok =
            run_validation(&[Suite::Oracle, Suite::Partition, Suite::Formulas], &opts).unwrap();
        assert!(ok.passed(), "{:?}", ok.checks);
        let bad = run_validation(
            &[Suite::Oracle],
            &ValidationOptions {
                tamper: true,
                ..opts
            },
        )
        .unwrap();
        assert!(!bad.passed());
    }

    #[test]
    fn tampered_sampler_is_biased() {
        let quick = ValidationOptions {
            effort: Effort::Quick,
            ..Default::default()
        };
        let honest = run_validation(&[Suite::Stratified, Suite::Unbiasedness], &quick).unwrap();
        assert!(honest.passed(), "{:?}", honest.checks);
        let tampered = ValidationOptions {
            tamper: true,
            ..quick
        };
        assert!(!stratified_checks(&tampered).unwrap()[1].passed);
        // the bias is small; it takes the full 10⁴ trials to see it
        let f = gamma_function(0.75, 1);
        let c = unbiasedness_check(
            SamplerKind::Haar,
            16,
            &f,
            &constant_one(1),
            10_000,
            &tampered,
        )
        .unwrap();
        assert!(!c.passed, "{c:?}");
    }

    #[test]
    fn tamper_keeps_points_in_their_cells() {
        let mut s = ContinuousSample {
            points: vec![vec![0.3, 0.9]],
            dim: 2,
        };
        tamper_continuous(&mut s, 1);
        assert!((s.points[0][0] - 0.18).abs() < 1e-12);
        assert!((s.points[0][1] - 0.82).abs() < 1e-12);
    }
}
