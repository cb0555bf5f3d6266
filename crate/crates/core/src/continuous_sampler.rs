//! Exact samplers for projection DPPs on `[0,1)^d` with Lebesgue reference
//! measure.
//!
//! Haar wavelet kernels go through [`sample_stratified_haar`]: one uniform
//! point in each dyadic cell. Every other kernel uses the sequential
//! (chain-rule) sampler [`sample_projection_chain`], which draws point `i`
//! from the conditional density
//!
//! ```text
//! p_i(x) = (K(x,x) − Σ_{e ∈ used} ⟨φ(x), e⟩²) / (n − i + 1)
//! ```
//!
//! by rejection from the uniform proposal, then appends the normalized
//! residual of `φ(x)` to the set of used directions.

use rand::Rng;

use crate::kernels::ProjectionKernel;
use crate::{Error, Result};

/// A realization of a rank-n projection DPP. The point order carries no
/// meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSample {
    pub points: Vec<Vec<f64>>,
    pub dim: usize,
}

impl ContinuousSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(|p| p.as_slice())
    }
}

/// How the rejection bound for `p_i` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `headroom · max p_i` over a tensor grid with `per_axis` nodes per
    /// coordinate, refreshed after every accepted point. An accepted
    /// candidate above the bound aborts the draw.
    Grid { per_axis: usize, headroom: f64 },
    /// `sup_x K(x,x) / (n − i + 1)`, which dominates `p_i` everywhere.
    DiagonalSup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub envelope: Envelope,
    pub max_rejections: usize,
}

impl ChainConfig {
    /// Grid envelope with 201 nodes per axis and 5% headroom.
    pub fn grid() -> Self {
        ChainConfig {
            envelope: Envelope::Grid {
                per_axis: 201,
                headroom: 1.05,
            },
            max_rejections: 1_000_000,
        }
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            envelope: Envelope::DiagonalSup,
            max_rejections: 1_000_000,
        }
    }
}

/// One uniform point in each of the `2^{dj}` half-open dyadic cells.
pub fn sample_stratified_haar<R: Rng + ?Sized>(
    scale: u32,
    dim: usize,
    rng: &mut R,
) -> ContinuousSample {
    let side = 1usize << scale;
    let width = 1.0 / side as f64;
    let cells = side.pow(dim as u32);
    let mut points = Vec::with_capacity(cells);
    for cell in 0..cells {
        let mut rem = cell;
        let mut p = vec![0.0; dim];
        for slot in p.iter_mut().rev() {
            let k = rem % side;
            rem /= side;
            // (k + u) / 2^j with u ∈ [0, 1) stays inside the half-open cell
            *slot = ((k as f64 + rng.random::<f64>()) * width)
                .min(((k + 1) as f64) * width - f64::EPSILON);
        }
        points.push(p);
    }
    ContinuousSample { points, dim }
}

/// Draws from `DPP(K, dx)`, routing Haar kernels to the stratified sampler.
pub fn sample<R: Rng + ?Sized>(kernel: &ProjectionKernel, rng: &mut R) -> Result<ContinuousSample> {
    match kernel.haar_scale() {
        Some(j) => Ok(sample_stratified_haar(j, kernel.dim(), rng)),
        None => sample_projection_chain(kernel, rng, &ChainConfig::default()),
    }
}

/// Generic sequential sampler for any bounded projection kernel.
pub fn sample_projection_chain<R: Rng + ?Sized>(
    kernel: &ProjectionKernel,
    rng: &mut R,
    config: &ChainConfig,
) -> Result<ContinuousSample> {
    let n = kernel.rank();
    let d = kernel.dim();
    let mut used: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut feat = Vec::new();
    let mut x = vec![0.0; d];

    let mut grid = match config.envelope {
        Envelope::Grid { per_axis, .. } => Some(GridState::new(kernel, per_axis)?),
        Envelope::DiagonalSup => None,
    };

    for step in 0..n {
        let remaining = (n - step) as f64;
        let bound = match (&config.envelope, &grid) {
            (Envelope::Grid { headroom, .. }, Some(g)) => headroom * g.max_residual() / remaining,
            _ => kernel.diag_sup() / remaining,
        };
        let mut rejections = 0usize;
        loop {
            for xi in x.iter_mut() {
                *xi = rng.random::<f64>();
            }
            kernel.sparse_features(&x, &mut feat)?;
            let density = residual_norm(&feat, &used) / remaining;
            if density > bound * (1.0 + 1e-9) {
                return Err(Error::EnvelopeViolated {
                    step,
                    density,
                    bound,
                });
            }
            if rng.random::<f64>() * bound < density {
                break;
            }
            rejections += 1;
            if rejections > config.max_rejections {
                return Err(Error::TooManyRejections {
                    step,
                    limit: config.max_rejections,
                });
            }
        }
        let dir = residual_direction(&feat, &used, n);
        if let Some(g) = grid.as_mut() {
            g.project_out(&dir);
        }
        used.push(dir);
        points.push(x.clone());
    }
    Ok(ContinuousSample { points, dim: d })
}

/// `‖φ‖² − Σ_e ⟨φ, e⟩²` for sparse `φ`.
fn residual_norm(feat: &[(usize, f64)], used: &[Vec<f64>]) -> f64 {
    let norm: f64 = feat.iter().map(|(_, v)| v * v).sum();
    let proj: f64 = used
        .iter()
        .map(|e| feat.iter().map(|&(k, v)| e[k] * v).sum::<f64>().powi(2))
        .sum();
    (norm - proj).max(0.0)
}

fn residual_direction(feat: &[(usize, f64)], used: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &(k, val) in feat {
        v[k] = val;
    }
    // two passes of Gram–Schmidt keep the directions orthonormal to ~1e-15
    for _ in 0..2 {
        for e in used {
            let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= c * ei;
            }
        }
    }
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}

struct GridState {
    features: Vec<Vec<(usize, f64)>>,
    residual: Vec<f64>,
}

impl GridState {
    fn new(kernel: &ProjectionKernel, per_axis: usize) -> Result<Self> {
        if per_axis < 2 {
            return Err(Error::InvalidParameter(
                "envelope grid needs at least 2 nodes per axis".into(),
            ));
        }
        let d = kernel.dim();
        let total = per_axis
            .checked_pow(d as u32)
            .filter(|&t| t <= 50_000_000)
            .ok_or_else(|| {
                Error::CostGuard(format!("envelope grid {per_axis}^{d} is too large"))
            })?;
        let mut features = Vec::with_capacity(total);
        let mut residual = Vec::with_capacity(total);
        let mut x = vec![0.0; d];
        for idx in 0..total {
            let mut rem = idx;
            for xi in x.iter_mut() {
                *xi = (rem % per_axis) as f64 / (per_axis - 1) as f64;
                rem /= per_axis;
            }
            let mut f = Vec::new();
            kernel.sparse_features(&x, &mut f)?;
            residual.push(f.iter().map(|(_, v)| v * v).sum());
            features.push(f);
        }
        Ok(GridState { features, residual })
    }

    fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }

    fn project_out(&mut self, dir: &[f64]) {
        for (f, r) in self.features.iter().zip(self.residual.iter_mut()) {
            let c: f64 = f.iter().map(|&(k, v)| dir[k] * v).sum();
            *r = (*r - c * c).max(0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::IndexMode;
    use crate::stats;
    use crate::wavelets::ScalingFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stratified_one_point_per_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let s = sample_stratified_haar(2, 1, &mut rng);
            let mut counts = [0; 4];
            for p in s.iter() {
                assert!((0.0..1.0).contains(&p[0]));
                counts[(p[0] * 4.0).floor() as usize] += 1;
            }
            assert_eq!(counts, [1; 4]);
        }
        let s = sample_stratified_haar(0, 1, &mut rng);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn chain_sampler_rank_one_is_uniform() {
        let k = ProjectionKernel::ope(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws: Vec<f64> = (0..20_000)
            .map(|_| {
                sample_projection_chain(&k, &mut rng, &ChainConfig::grid())
                    .unwrap()
                    .points[0][0]
            })
            .collect();
        assert!(stats::ks_uniform(&draws) < stats::ks_critical(draws.len(), 0.01));
    }

    #[test]
    fn chain_sampler_on_haar_is_stratified() {
        let k =
            ProjectionKernel::wavelet(ScalingFunction::haar(), 2, 1, IndexMode::Interior).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for cfg in [ChainConfig::default(), ChainConfig::grid()] {
            for _ in 0..500 {
                let s = sample_projection_chain(&k, &mut rng, &cfg).unwrap();
                let mut cells: Vec<usize> = s.iter().map(|p| (p[0] * 4.0) as usize).collect();
                cells.sort();
                assert_eq!(cells, vec![0, 1, 2, 3]);
            }
        }
    }

    #[test]
    fn chain_sampler_returns_rank_many_points_in_domain() {
        let db2 = ScalingFunction::daubechies2().unwrap();
        let kernels = [
            ProjectionKernel::wavelet(db2.clone(), 3, 1, IndexMode::Periodized).unwrap(),
            ProjectionKernel::wavelet(db2, 1, 2, IndexMode::Periodized).unwrap(),
            ProjectionKernel::ope(2, 5).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in &kernels {
            for _ in 0..20 {
                let s = sample(k, &mut rng).unwrap();
                assert_eq!(s.len(), k.rank());
                assert!(s.iter().all(|p| p.iter().all(|c| (0.0..1.0).contains(c))));
            }
        }
    }

    #[test]
    fn coarse_grid_envelope_can_be_violated() {
        // three grid nodes cannot resolve a degree-6 polynomial diagonal
        let k = ProjectionKernel::ope(1, 7).unwrap();
        let cfg = ChainConfig {
            envelope: Envelope::Grid {
                per_axis: 4,
                headroom: 1.0,
            },
            max_rejections: 1_000_000,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let outcomes: Vec<_> = (0..50)
            .map(|_| sample_projection_chain(&k, &mut rng, &cfg))
            .collect();
        assert!(outcomes
            .iter()
            .any(|o| matches!(o, Err(Error::EnvelopeViolated { .. }))));
    }
}
