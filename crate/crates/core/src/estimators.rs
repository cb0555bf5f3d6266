//! Linear statistics, DPP quadrature and coreset estimators, and exact
//! variance formulas.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::continuous_sampler::ContinuousSample;
use crate::discretize::DiscreteProjectionDpp;
use crate::integrate;
use crate::kernels::{IndexMode, ProjectionKernel};
use crate::{Error, Result};

/// Largest dataset accepted by the pairwise variance formula.
pub const PAIRWISE_VARIANCE_LIMIT: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularity {
    /// Hölder continuous with exponent `s ∈ (0, 1]`.
    Holder(f64),
    Smooth,
}

type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A real function on `[0,1]^d` with the metadata the experiments need.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    dim: usize,
    regularity: Regularity,
    vanishes_on_boundary: bool,
    /// Per-axis kinks, used to split reference integrals.
    breaks: Vec<f64>,
    eval: Eval,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("regularity", &self.regularity)
            .finish()
    }
}

impl TestFunction {
    pub fn new<F>(name: impl Into<String>, dim: usize, regularity: Regularity, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        TestFunction {
            name: name.into(),
            dim,
            regularity,
            vanishes_on_boundary: false,
            breaks: Vec::new(),
            eval: Arc::new(f),
        }
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn vanishing_on_boundary(mut self) -> Self {
        self.vanishes_on_boundary = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        self.vanishes_on_boundary
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// `max |f|` over a `per_axis^d` grid including the boundary.
    pub fn grid_sup(&self, per_axis: usize) -> f64 {
        grid_points(self.dim, per_axis, false)
            .map(|x| self.eval(&x).abs())
            .fold(0.0, f64::max)
    }

    /// Reference value of `∫ f ω` over `[0,1]^d` (`d ≤ 2`).
    pub fn integral_against(&self, omega: &TestFunction) -> Result<f64> {
        let mut breaks = self.breaks.clone();
        breaks.extend_from_slice(&omega.breaks);
        integrate::integrate_cube(
            |x| self.eval(x) * omega.eval(x),
            self.dim,
            &breaks,
            integrate::DEFAULT_TOLERANCE,
        )
    }

    pub fn integral(&self) -> Result<f64> {
        integrate::integrate_cube(
            |x| self.eval(x),
            self.dim,
            &self.breaks,
            integrate::DEFAULT_TOLERANCE,
        )
    }
}

/// Points of a tensor grid on `[0,1]^d`: cell midpoints when `midpoint` is
/// set, otherwise `per_axis` equispaced nodes including both ends.
fn grid_points(dim: usize, per_axis: usize, midpoint: bool) -> impl Iterator<Item = Vec<f64>> {
    let total = per_axis.pow(dim as u32);
    (0..total).map(move |idx| {
        let mut rem = idx;
        let mut x = vec![0.0; dim];
        for xi in x.iter_mut().rev() {
            let m = (rem % per_axis) as f64;
            *xi = if midpoint {
                (m + 0.5) / per_axis as f64
            } else {
                m / (per_axis - 1) as f64
            };
            rem /= per_axis;
        }
        x
    })
}

pub fn gamma_factor(gamma: f64, t: f64) -> f64 {
    (t - 0.5).abs().powf(gamma)
}

pub fn mixcos_factor(t: f64) -> f64 {
    0.1 * (5.0 * PI * (t - 0.5)).cos().abs() + (t - 0.5).powi(2)
}

pub fn bump_factor(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-0.1 / (t * (1.0 - t))).exp()
    }
}

fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| integrate::integrate_unit(bump_factor, &[0.5], 1e-13))
}

/// `φ_γ(x) = (1/d) Σ_i |x_i − ½|^γ / ∫_0^1 |t − ½|^γ dt`.
pub fn gamma_function(gamma: f64, dim: usize) -> TestFunction {
    let mass = 0.5f64.powf(gamma) / (gamma + 1.0);
    TestFunction::new(
        format!("gamma{gamma}"),
        dim,
        Regularity::Holder(gamma.min(1.0)),
        move |x| x.iter().map(|&t| gamma_factor(gamma, t)).sum::<f64>() / (x.len() as f64 * mass),
    )
    .with_breaks(vec![0.5])
}

/// `φ_mixcos(x) = (1/d) Σ_i f_mc(x_i) / ∫ f_mc`, with `∫ f_mc = 0.2/π + 1/12`.
pub fn mixcos_function(dim: usize) -> TestFunction {
    let mass = 0.2 / PI + 1.0 / 12.0;
    TestFunction::new("mixcos", dim, Regularity::Holder(1.0), move |x| {
        x.iter().map(|&t| mixcos_factor(t)).sum::<f64>() / (x.len() as f64 * mass)
    })
    .with_breaks(vec![0.2, 0.4, 0.6, 0.8])
}

/// `φ_bump(x) = Π_i f_bump(x_i) / ∫ f_bump`.
pub fn bump_function(dim: usize) -> TestFunction {
    let mass = bump_mass();
    TestFunction::new("bump", dim, Regularity::Smooth, move |x| {
        x.iter().map(|&t| bump_factor(t) / mass).product()
    })
    .vanishing_on_boundary()
}

/// `x ↦ min_c ‖x − c‖²`.
pub fn kmeans_loss(centers: Vec<Vec<f64>>) -> TestFunction {
    let dim = centers.first().map_or(0, |c| c.len());
    TestFunction::new("kmeans", dim, Regularity::Holder(1.0), move |x| {
        centers
            .iter()
            .map(|c| c.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    })
}

/// Hinge loss `max(0, 1 − y ⟨θ, x⟩)` for points of a fixed class `y`.
pub fn hinge_loss(theta: Vec<f64>, label: f64) -> TestFunction {
    let dim = theta.len();
    TestFunction::new("hinge", dim, Regularity::Holder(1.0), move |x| {
        let margin: f64 = theta.iter().zip(x).map(|(a, b)| a * b).sum();
        (1.0 - label * margin).max(0.0)
    })
}

/// `ω ≡ 1`.
pub fn constant_one(dim: usize) -> TestFunction {
    TestFunction::new("one", dim, Regularity::Smooth, |_| 1.0)
}

/// `C¹` biweight bump centred at ½ with radius `r` on each axis, normalised
/// to integrate to 1 over `[0,1]^d`.
pub fn biweight_bump(dim: usize, radius: f64) -> TestFunction {
    let c = 15.0 / (16.0 * radius);
    TestFunction::new("biweight", dim, Regularity::Holder(1.0), move |x| {
        x.iter()
            .map(|&t| {
                let u = (t - 0.5) / radius;
                if u.abs() < 1.0 {
                    c * (1.0 - u * u).powi(2)
                } else {
                    0.0
                }
            })
            .product()
    })
    .with_breaks(vec![0.5 - radius, 0.5 + radius])
    .vanishing_on_boundary()
}

/// Library lookup by name: `gamma<γ>` (also `gamma(<γ>)` / `gamma:<γ>`),
/// `mixcos`, `bump`, `one`.
pub fn test_function_library(name: &str, dim: usize) -> Result<TestFunction> {
    let lower = name.trim().to_ascii_lowercase();
    match lower.as_str() {
        "mixcos" => return Ok(mixcos_function(dim)),
        "bump" => return Ok(bump_function(dim)),
        "one" => return Ok(constant_one(dim)),
        _ => {}
    }
    if let Some(rest) = lower.strip_prefix("gamma") {
        let param = rest.trim_matches(|c| c == '(' || c == ')' || c == ':' || c == '=' || c == '_');
        if let Ok(g) = param.parse::<f64>() {
            if g > 0.0 {
                return Ok(gamma_function(g, dim));
            }
        }
    }
    Err(Error::UnknownFunction(name.to_string()))
}

/// `Σ_{Y ∈ S} f(Y)`.
pub fn linear_statistic<'a, I>(points: I, f: &TestFunction) -> f64
where
    I: IntoIterator<Item = &'a [f64]>,
{
    points.into_iter().map(|y| f.eval(y)).sum()
}

/// `Σ_i f(Y_i) ω(Y_i) / K(Y_i, Y_i)`, unbiased for `∫ f ω`.
pub fn quadrature_basic(
    sample: &ContinuousSample,
    kernel: &ProjectionKernel,
    f: &TestFunction,
    omega: &TestFunction,
) -> Result<f64> {
    let mut total = 0.0;
    for (i, y) in sample.iter().enumerate() {
        let k = kernel.diagonal(y)?;
        if !(k > 0.0) {
            return Err(Error::ZeroDiagonal { index: i });
        }
        total += f.eval(y) * omega.eval(y) / k;
    }
    Ok(total)
}

/// Where the design point `x_k` sits inside the support of feature `k`.
/// Any point of the support gives an unbiased adjusted estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DesignRule {
    /// `2^{-j}(k + M)` with `M = ∫ x φ`: the control variate then reproduces
    /// affine integrands away from the periodization seam. For db2 the mass
    /// of `φ` sits far from the middle of its support, so this matters.
    #[default]
    FirstMoment,
    /// Middle of the support, `2^{-j}(k + (a+b)/2)`.
    SupportCenter,
}

impl std::str::FromStr for DesignRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moment" | "first-moment" => Ok(DesignRule::FirstMoment),
            "center" | "centre" => Ok(DesignRule::SupportCenter),
            _ => Err(Error::InvalidParameter(format!(
                "unknown design rule `{s}`"
            ))),
        }
    }
}

/// One point `x_k` in the support of each wavelet feature, in feature order.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoints {
    pub points: Vec<Vec<f64>>,
    /// `2^{-dj/2}`, the scale factor of the correction terms.
    pub weight: f64,
}

impl DesignPoints {
    /// Points wrap into `[0,1)` in periodized mode.
    pub fn new(kernel: &ProjectionKernel, rule: DesignRule) -> Result<Self> {
        let (sf, index) = kernel
            .wavelet_index()
            .ok_or_else(|| Error::InvalidParameter("design points need a wavelet kernel".into()))?;
        let offset = match rule {
            DesignRule::FirstMoment => sf.first_moment(),
            DesignRule::SupportCenter => {
                let (a, b) = sf.support();
                0.5 * (a + b)
            }
        };
        let width = 1.0 / (1u64 << index.scale) as f64;
        let points = index
            .shifts()
            .map(|k| {
                k.iter()
                    .map(|&ki| {
                        let c = (ki as f64 + offset) * width;
                        match index.mode {
                            IndexMode::Interior => c,
                            IndexMode::Periodized => c.rem_euclid(1.0),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(DesignPoints {
            points,
            weight: width.powf(0.5 * kernel.dim() as f64),
        })
    }

    /// The control variate `c(x) = 2^{-dj/2} Σ_k Φ_{-j,k}(x) g_k`.
    pub fn control(
        &self,
        kernel: &ProjectionKernel,
        g: &[f64],
        x: &[f64],
        buf: &mut Vec<(usize, f64)>,
    ) -> Result<f64> {
        kernel.sparse_features(x, buf)?;
        Ok(self.weight * buf.iter().map(|&(k, v)| v * g[k]).sum::<f64>())
    }
}

/// `𝓛(f) − 2^{-dj/2} Σ_i Σ_k Φ_{-j,k}(Y_i)/K(Y_i,Y_i) f(x_k)ω(x_k) + 2^{-dj} Σ_k f(x_k)ω(x_k)`.
pub fn quadrature_adjusted(
    sample: &ContinuousSample,
    kernel: &ProjectionKernel,
    f: &TestFunction,
    omega: &TestFunction,
    dp: &DesignPoints,
) -> Result<f64> {
    if dp.points.len() != kernel.rank() {
        return Err(Error::DimensionMismatch {
            expected: kernel.rank(),
            got: dp.points.len(),
        });
    }
    let g: Vec<f64> = dp
        .points
        .iter()
        .map(|x| f.eval(x) * omega.eval(x))
        .collect();
    let mut feat = Vec::new();
    let mut total = dp.weight * dp.weight * g.iter().sum::<f64>();
    for (i, y) in sample.iter().enumerate() {
        kernel.sparse_features(y, &mut feat)?;
        let k: f64 = feat.iter().map(|(_, v)| v * v).sum();
        if !(k > 0.0) {
            return Err(Error::ZeroDiagonal { index: i });
        }
        let c = dp.weight * feat.iter().map(|&(idx, v)| v * g[idx]).sum::<f64>();
        total += (f.eval(y) * omega.eval(y) - c) / k;
    }
    Ok(total)
}

/// `Σ_{i ∈ S} f(X_i) / K_ii`, unbiased for `Σ_i f(X_i)` given the data.
/// `values[i] = f(X_i)`.
pub fn coreset_estimate(
    selected: &[usize],
    dpp: &DiscreteProjectionDpp,
    values: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for &i in selected {
        let p = dpp.inclusion_probability(i)?;
        if !(p > 0.0) {
            return Err(Error::ZeroDiagonal { index: i });
        }
        total += values[i] / p;
    }
    Ok(total)
}

/// Control-variate version: `Σ_{i ∈ S} (f(X_i) − c_i)/K_ii + Σ_i c_i`,
/// where `control_total = Σ_i c_i` over the whole dataset.
pub fn coreset_estimate_adjusted(
    selected: &[usize],
    dpp: &DiscreteProjectionDpp,
    values: &[f64],
    control: &[f64],
    control_total: f64,
) -> Result<f64> {
    let mut total = control_total;
    for &i in selected {
        let p = dpp.inclusion_probability(i)?;
        if !(p > 0.0) {
            return Err(Error::ZeroDiagonal { index: i });
        }
        total += (values[i] - control[i]) / p;
    }
    Ok(total)
}

/// Midpoint grid sizes used by [`continuous_variance_exact`]; powers of two
/// so that dyadic cells are unions of grid cells.
pub const VARIANCE_GRID_1D: usize = 2048;
pub const VARIANCE_GRID_2D: usize = 512;

/// `Var[Σ_{Y∈S} f(Y)] = ∫ f² K(x,x) dx − Σ_{k,l} (∫ f φ_k φ_l)²` under
/// `DPP(K, dx)`, by midpoint quadrature (2048 nodes per axis for `d = 1`,
/// 512 for `d = 2`).
pub fn continuous_variance_exact<F>(kernel: &ProjectionKernel, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let per_axis = match kernel.dim() {
        1 => VARIANCE_GRID_1D,
        2 => VARIANCE_GRID_2D,
        d => {
            return Err(Error::InvalidParameter(format!(
                "continuous variance is computed for d ≤ 2, got {d}"
            )))
        }
    };
    continuous_variance_on_grid(kernel, f, per_axis)
}

pub fn continuous_variance_on_grid<F>(
    kernel: &ProjectionKernel,
    f: F,
    per_axis: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = kernel.rank();
    let d = kernel.dim();
    let w = (per_axis as f64).powi(-(d as i32));
    let points: Vec<Vec<f64>> = grid_points(d, per_axis, true).collect();
    let (diag_term, gram) = points
        .par_chunks(4096)
        .map(|chunk| -> Result<(f64, Vec<f64>)> {
            let mut gram = vec![0.0; n * n];
            let mut diag = 0.0;
            let mut feat = Vec::new();
            for x in chunk {
                let fx = f(x);
                if fx == 0.0 {
                    continue;
                }
                kernel.sparse_features(x, &mut feat)?;
                let kxx: f64 = feat.iter().map(|(_, v)| v * v).sum();
                diag += w * fx * fx * kxx;
                for &(a, va) in &feat {
                    for &(b, vb) in &feat {
                        gram[a * n + b] += w * fx * va * vb;
                    }
                }
            }
            Ok((diag, gram))
        })
        .try_reduce(
            || (0.0, vec![0.0; n * n]),
            |(d1, mut g1), (d2, g2)| {
                g1.iter_mut().zip(&g2).for_each(|(a, b)| *a += b);
                Ok((d1 + d2, g1))
            },
        )?;
    let cross: f64 = gram.iter().map(|v| v * v).sum();
    Ok(diag_term - cross)
}

/// `½ Σ_{i,j} (f_i − f_j)² K_ij²`, the exact variance of `Σ_{i∈S} f_i`
/// under the discrete projection DPP. Entries of `K` are formed row by row
/// from `U`; `O(N² m)`.
pub fn discrete_variance_exact(dpp: &DiscreteProjectionDpp, values: &[f64]) -> Result<f64> {
    let n = dpp.len();
    if values.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: values.len(),
        });
    }
    if n > PAIRWISE_VARIANCE_LIMIT {
        return Err(Error::CostGuard(format!(
            "pairwise variance on {n} points exceeds the limit of {PAIRWISE_VARIANCE_LIMIT}"
        )));
    }
    let u = dpp.basis();
    let m = u.ncols();
    // row-major copy for cache-friendly dot products
    let rows: Vec<f64> = (0..n)
        .flat_map(|i| u.row(i).iter().copied().collect::<Vec<_>>())
        .collect();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let ri = &rows[i * m..(i + 1) * m];
            let mut acc = 0.0;
            for j in (i + 1)..n {
                let rj = &rows[j * m..(j + 1) * m];
                let k: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                let diff = values[i] - values[j];
                acc += diff * diff * k * k;
            }
            acc
        })
        .sum();
    Ok(total)
}

/// Same variance via `Σ_i f_i² K_ii − ‖Uᵀ D(f) U‖_F²`, in `O(N m²)`.
pub fn discrete_variance_gram(dpp: &DiscreteProjectionDpp, values: &[f64]) -> Result<f64> {
    let n = dpp.len();
    if values.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: values.len(),
        });
    }
    let u = dpp.basis();
    let mut scaled = u.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= values[i];
    }
    let m = u.transpose() * scaled;
    let diag: f64 = (0..n)
        .map(|i| values[i] * values[i] * dpp.inclusion_probabilities()[i])
        .sum();
    Ok(diag - m.norm_squared())
}

/// Variance of the weighted statistic `Σ_{i∈S} w_i f_i`.
pub fn discrete_variance_weighted(
    dpp: &DiscreteProjectionDpp,
    values: &[f64],
    weights: &[f64],
) -> Result<f64> {
    if weights.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            got: weights.len(),
        });
    }
    let wf: Vec<f64> = values.iter().zip(weights).map(|(f, w)| f * w).collect();
    discrete_variance_exact(dpp, &wf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous_sampler::sample_stratified_haar;
    use crate::discretize::{build_discrete_dpp, build_feature_matrix};
    use crate::wavelets::ScalingFunction;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn haar(j: u32, d: usize) -> ProjectionKernel {
        ProjectionKernel::wavelet(ScalingFunction::haar(), j, d, IndexMode::Interior).unwrap()
    }

    #[test]
    fn library_values() {
        assert_eq!(gamma_factor(0.75, 0.5), 0.0);
        assert_eq!(bump_factor(1e-300), 0.0);
        assert!(bump_factor(1e-3) < 1e-40);
        let k = kmeans_loss(vec![vec![0.3, 0.4], vec![0.9, 0.9]]);
        assert_eq!(k.eval(&[0.3, 0.4]), 0.0);
        assert!((k.eval(&[0.3, 0.5]) - 0.01).abs() < 1e-15);
        assert!(matches!(
            test_function_library("nope", 1),
            Err(Error::UnknownFunction(_))
        ));
        assert_eq!(
            test_function_library("gamma(0.25)", 1)
                .unwrap()
                .regularity(),
            Regularity::Holder(0.25)
        );
        assert!(test_function_library("gamma:0.75", 2).is_ok());
        let h = hinge_loss(vec![1.0, 0.0], 1.0);
        assert_eq!(h.eval(&[2.0, 5.0]), 0.0);
        assert_eq!(h.eval(&[0.0, 5.0]), 1.0);
    }

    #[test]
    fn library_functions_integrate_to_one() {
        for d in 1..=2 {
            for name in ["gamma0.25", "gamma0.75", "mixcos", "bump"] {
                let f = test_function_library(name, d).unwrap();
                let v = f.integral().unwrap();
                assert!((v - 1.0).abs() < 1e-8, "{name} d={d}: {v}");
            }
            assert!((biweight_bump(d, 0.45).integral().unwrap() - 1.0).abs() < 1e-9);
        }
        let b = bump_function(1);
        assert!(b.vanishes_on_boundary());
        assert_eq!(b.eval(&[0.0]), 0.0);
        assert_eq!(b.eval(&[1.0]), 0.0);
        assert!(gamma_function(0.75, 2).grid_sup(101).is_finite());
    }

    #[test]
    fn statistic_examples() {
        let id = TestFunction::new("id", 1, Regularity::Smooth, |x| x[0]);
        let pts = [vec![0.2], vec![0.7]];
        assert!((linear_statistic(pts.iter().map(|p| p.as_slice()), &id) - 0.9).abs() < 1e-15);
        let one = constant_one(1);
        assert_eq!(
            linear_statistic(pts.iter().map(|p| p.as_slice()), &one),
            2.0
        );
    }

    #[test]
    fn quadrature_with_constant_integrand_is_exact() {
        let k = haar(3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = TestFunction::new("c", 1, Regularity::Smooth, |_| 2.5);
        let one = constant_one(1);
        let dp = DesignPoints::new(&k, DesignRule::default()).unwrap();
        for _ in 0..50 {
            let s = sample_stratified_haar(3, 1, &mut rng);
            assert!((quadrature_basic(&s, &k, &c, &one).unwrap() - 2.5).abs() < 1e-12);
            assert!((quadrature_adjusted(&s, &k, &c, &one, &dp).unwrap() - 2.5).abs() < 1e-12);
            let zero = TestFunction::new("0", 1, Regularity::Smooth, |_| 0.0);
            assert_eq!(quadrature_adjusted(&s, &k, &zero, &one, &dp).unwrap(), 0.0);
        }
    }

    #[test]
    fn design_points_lie_in_supports() {
        let db2 = ScalingFunction::daubechies2().unwrap();
        for mode in [IndexMode::Interior, IndexMode::Periodized] {
            let k = ProjectionKernel::wavelet(db2.clone(), 3, 2, mode).unwrap();
            for rule in [DesignRule::FirstMoment, DesignRule::SupportCenter] {
                let dp = DesignPoints::new(&k, rule).unwrap();
                let mut feat = Vec::new();
                for (idx, x) in dp.points.iter().enumerate() {
                    k.sparse_features(x, &mut feat).unwrap();
                    assert!(feat.iter().any(|&(i, v)| i == idx && v != 0.0));
                }
            }
        }
    }

    #[test]
    fn moment_design_reproduces_affine_functions() {
        let db2 = ScalingFunction::daubechies2().unwrap();
        let k = ProjectionKernel::wavelet(db2, 4, 1, IndexMode::Interior).unwrap();
        let dp = DesignPoints::new(&k, DesignRule::FirstMoment).unwrap();
        let g: Vec<f64> = dp.points.iter().map(|x| 0.3 + 2.0 * x[0]).collect();
        let mut buf = Vec::new();
        // every shift overlapping x is an interior shift on [2/16, 14/16]
        for i in 0..=100 {
            let x = 2.0 / 16.0 + 12.0 / 16.0 * i as f64 / 100.0;
            let c = dp.control(&k, &g, &[x], &mut buf).unwrap();
            assert!((c - (0.3 + 2.0 * x)).abs() < 1e-5, "x = {x}: {c}");
        }
        assert!("center".parse::<DesignRule>().is_ok() && "x".parse::<DesignRule>().is_err());
    }

    #[test]
    fn haar_indicator_has_zero_variance() {
        let k = haar(1, 1);
        let v = continuous_variance_exact(&k, |x| if x[0] < 0.5 { 1.0 } else { 0.0 }).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
        let v = continuous_variance_exact(&haar(1, 2), |_| 3.0).unwrap();
        assert!(v.abs() < 1e-9);
        let ope = ProjectionKernel::ope(1, 1).unwrap();
        // rank 1 uniform: Var f(U) = 1/12 for f(x) = x
        let v = continuous_variance_exact(&ope, |x| x[0]).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 1e-6);
    }

    #[test]
    fn discrete_variance_examples() {
        let id = DiscreteProjectionDpp::from_basis(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(
            discrete_variance_exact(&id, &[1.0, 5.0, -2.0]).unwrap(),
            0.0
        );
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r1 =
            DiscreteProjectionDpp::from_basis(DMatrix::from_column_slice(2, 1, &[s, s])).unwrap();
        assert!((discrete_variance_exact(&r1, &[0.0, 1.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((discrete_variance_gram(&r1, &[0.0, 1.0]).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pairwise_and_gram_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pts = crate::data::uniform_points(500, 1, &mut rng);
        let db2 = ScalingFunction::daubechies2().unwrap();
        let k = ProjectionKernel::wavelet(db2, 3, 1, IndexMode::Periodized).unwrap();
        let psi = build_feature_matrix(&k, &pts).unwrap();
        let dpp = build_discrete_dpp(&psi, &vec![1.0; 500], 1e-10).unwrap();
        let f: Vec<f64> = pts.iter().map(|p| (3.0 * p[0]).sin()).collect();
        let a = discrete_variance_exact(&dpp, &f).unwrap();
        let b = discrete_variance_gram(&dpp, &f).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn coreset_examples() {
        let id = DiscreteProjectionDpp::from_basis(DMatrix::identity(3, 3)).unwrap();
        let vals = [1.0, 2.0, 4.0];
        assert_eq!(coreset_estimate(&[0, 1, 2], &id, &vals).unwrap(), 7.0);
        let c = 1.0 / 3f64.sqrt();
        let r1 = DiscreteProjectionDpp::from_basis(DMatrix::from_column_slice(3, 1, &[c, c, c]))
            .unwrap();
        for i in 0..3 {
            assert!((coreset_estimate(&[i], &r1, &[1.0; 3]).unwrap() - 3.0).abs() < 1e-12);
        }
        assert!(coreset_estimate(&[5], &r1, &[1.0; 3]).is_err());
        // the control variate cancels when it equals f
        let est = coreset_estimate_adjusted(&[1], &r1, &vals, &vals, 7.0).unwrap();
        assert!((est - 7.0).abs() < 1e-12);
    }
}
