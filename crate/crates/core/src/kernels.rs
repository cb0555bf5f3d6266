//! Rank-n projection kernels `K(x, y) = Σ_k φ_k(x) φ_k(y)` on `[0,1]^d`.
//!
//! Two families are provided: wavelet kernels built from the tensor products
//! `Φ_{-j,k}` over an index set of shifts, and the orthogonal polynomial
//! ensemble (OPE) kernel built from tensor Legendre polynomials that are
//! orthonormal for the uniform measure on `[0,1]^d`.

use crate::wavelets::{active_shifts, active_shifts_periodic, ScalingFunction, ScalingKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    /// Shifts whose support lies inside `[0,1]^d`.
    Interior,
    /// All shifts `{0, …, 2^j − 1}^d` of the 1-periodized functions.
    Periodized,
}

/// Shifts `k ∈ ℤ^d` used by a wavelet kernel. The set is a Cartesian
/// product of one integer range per axis; features are numbered with the
/// first coordinate varying slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveletIndexSet {
    pub scale: u32,
    pub dim: usize,
    pub mode: IndexMode,
    /// Inclusive per-axis shift range.
    pub range: (i64, i64),
}

impl WaveletIndexSet {
    pub fn new(sf: &ScalingFunction, scale: u32, dim: usize, mode: IndexMode) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if scale > 30 {
            return Err(Error::InvalidParameter(format!(
                "scale {scale} is too fine"
            )));
        }
        let range = match mode {
            IndexMode::Interior => {
                let (a, b) = sf.support();
                let lo = (-a).ceil() as i64;
                let hi = ((1u64 << scale) as f64 - b).floor() as i64;
                (lo, hi)
            }
            IndexMode::Periodized => (0, (1i64 << scale) - 1),
        };
        if range.1 < range.0 {
            return Err(Error::EmptyIndexSet { scale });
        }
        Ok(WaveletIndexSet {
            scale,
            dim,
            mode,
            range,
        })
    }

    pub fn per_axis(&self) -> usize {
        (self.range.1 - self.range.0 + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Shift vector of feature `index`.
    pub fn shift(&self, index: usize) -> Vec<i64> {
        let per_axis = self.per_axis();
        let mut k = vec![0i64; self.dim];
        let mut rem = index;
        for slot in k.iter_mut().rev() {
            *slot = self.range.0 + (rem % per_axis) as i64;
            rem /= per_axis;
        }
        k
    }

    pub fn shifts(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|i| self.shift(i))
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.dim
            && k.iter()
                .all(|&ki| (self.range.0..=self.range.1).contains(&ki))
    }
}

#[derive(Debug, Clone)]
pub enum KernelFamily {
    Wavelet {
        scaling: ScalingFunction,
        index: WaveletIndexSet,
    },
    Ope {
        /// Degree multi-index of each feature, in feature order.
        multi_indices: Vec<Vec<usize>>,
    },
}

#[derive(Debug, Clone)]
pub struct ProjectionKernel {
    family: KernelFamily,
    dim: usize,
    rank: usize,
    diag_sup: f64,
}

impl ProjectionKernel {
    /// Wavelet DPP kernel `Σ_{k ∈ 𝓘(j)} Φ_{-j,k}(x) Φ_{-j,k}(y)`.
    pub fn wavelet(sf: ScalingFunction, scale: u32, dim: usize, mode: IndexMode) -> Result<Self> {
        let index = WaveletIndexSet::new(&sf, scale, dim, mode)?;
        let rank = index.len();
        let axis_sup = wavelet_axis_diag_sup(&sf, &index);
        Ok(ProjectionKernel {
            family: KernelFamily::Wavelet { scaling: sf, index },
            dim,
            rank,
            diag_sup: axis_sup.powi(dim as i32),
        })
    }

    /// OPE kernel of the first `n` tensor Legendre polynomials in graded
    /// order, lexicographic within a degree (`(1,0)` before `(0,1)`).
    pub fn ope(dim: usize, n: usize) -> Result<Self> {
        if dim == 0 || n == 0 {
            return Err(Error::InvalidParameter(
                "OPE kernel needs positive dimension and rank".into(),
            ));
        }
        let multi_indices = graded_multi_indices(dim, n);
        // |P_k| ≤ 1 on [-1, 1] with equality at the endpoints
        let diag_sup = multi_indices
            .iter()
            .map(|a| a.iter().map(|&d| (2 * d + 1) as f64).product::<f64>())
            .sum();
        Ok(ProjectionKernel {
            family: KernelFamily::Ope { multi_indices },
            dim,
            rank: n,
            diag_sup,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    /// `Some(j)` for a Haar wavelet kernel whose cells tile `[0,1)^d`.
    pub fn haar_scale(&self) -> Option<u32> {
        match &self.family {
            KernelFamily::Wavelet { scaling, index } if scaling.kind() == ScalingKind::Haar => {
                Some(index.scale)
            }
            _ => None,
        }
    }

    pub fn wavelet_index(&self) -> Option<(&ScalingFunction, &WaveletIndexSet)> {
        match &self.family {
            KernelFamily::Wavelet { scaling, index } => Some((scaling, index)),
            KernelFamily::Ope { .. } => None,
        }
    }

    /// Short label: `haar`, `db2` or `ope`.
    pub fn label(&self) -> &'static str {
        match &self.family {
            KernelFamily::Wavelet { scaling, .. } => match scaling.kind() {
                ScalingKind::Haar => "haar",
                ScalingKind::Daubechies2 => "db2",
            },
            KernelFamily::Ope { .. } => "ope",
        }
    }

    /// An upper bound on `sup_x K(x, x)` over `[0,1]^d`; attained for Haar,
    /// OPE and table-interpolated db2.
    pub fn diag_sup(&self) -> f64 {
        self.diag_sup
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Nonzero features at `x` as `(feature index, value)` pairs.
    pub fn sparse_features(&self, x: &[f64], out: &mut Vec<(usize, f64)>) -> Result<()> {
        self.check_dim(x)?;
        out.clear();
        match &self.family {
            KernelFamily::Wavelet { scaling, index } => {
                let per_axis = index.per_axis();
                let mut axes: Vec<Vec<(usize, f64)>> = Vec::with_capacity(self.dim);
                let mut raw = Vec::with_capacity(8);
                for &xi in x {
                    match index.mode {
                        IndexMode::Interior => active_shifts(scaling, index.scale, xi, &mut raw),
                        IndexMode::Periodized => {
                            active_shifts_periodic(scaling, index.scale, xi, &mut raw)
                        }
                    }
                    let axis: Vec<(usize, f64)> = raw
                        .iter()
                        .filter(|(k, _)| (index.range.0..=index.range.1).contains(k))
                        .map(|&(k, v)| ((k - index.range.0) as usize, v))
                        .collect();
                    if axis.is_empty() {
                        return Ok(());
                    }
                    axes.push(axis);
                }
                tensor_combine(&axes, per_axis, out);
            }
            KernelFamily::Ope { multi_indices } => {
                let max_deg = multi_indices.iter().flatten().copied().max().unwrap_or(0);
                let tables: Vec<Vec<f64>> =
                    x.iter().map(|&xi| shifted_legendre(max_deg, xi)).collect();
                for (idx, alpha) in multi_indices.iter().enumerate() {
                    let v: f64 = alpha.iter().zip(&tables).map(|(&d, t)| t[d]).product();
                    if v != 0.0 {
                        out.push((idx, v));
                    }
                }
            }
        }
        Ok(())
    }

    /// Dense feature vector `(φ_1(x), …, φ_n(x))`.
    pub fn features(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        let mut sparse = Vec::new();
        self.sparse_features(x, &mut sparse)?;
        out.clear();
        out.resize(self.rank, 0.0);
        for (k, v) in sparse {
            out[k] = v;
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let mut fx = Vec::new();
        let mut fy = Vec::new();
        self.sparse_features(x, &mut fx)?;
        self.sparse_features(y, &mut fy)?;
        let mut acc = 0.0;
        for &(k, v) in &fx {
            if let Some(&(_, w)) = fy.iter().find(|(kk, _)| *kk == k) {
                acc += v * w;
            }
        }
        Ok(acc)
    }

    pub fn diagonal(&self, x: &[f64]) -> Result<f64> {
        let mut fx = Vec::new();
        self.sparse_features(x, &mut fx)?;
        Ok(fx.iter().map(|(_, v)| v * v).sum())
    }
}

fn tensor_combine(axes: &[Vec<(usize, f64)>], per_axis: usize, out: &mut Vec<(usize, f64)>) {
    out.push((0, 1.0));
    for axis in axes {
        let prev = std::mem::take(out);
        for &(idx, val) in &prev {
            for &(k, v) in axis {
                out.push((idx * per_axis + k, val * v));
            }
        }
    }
}

/// Sup over `x ∈ [0,1]` of the 1-D diagonal `Σ_k φ_{j,k}(x)²` restricted to
/// the index range. The features are linear between the nodes
/// `m 2^{-(r+j)}`, so the maximum of the sum of squares is on a node.
fn wavelet_axis_diag_sup(sf: &ScalingFunction, index: &WaveletIndexSet) -> f64 {
    let r = sf.levels();
    let dil = 1u64 << index.scale;
    let periodic = index.mode == IndexMode::Periodized;
    let nodes_per_unit = if periodic {
        1u64 << r
    } else {
        (1u64 << r) * dil
    };
    let step = 1.0 / ((1u64 << r) * dil) as f64;
    let mut raw = Vec::new();
    let mut best = 0.0f64;
    for m in 0..=nodes_per_unit {
        let x = (m as f64 * step).min(1.0);
        if periodic {
            active_shifts_periodic(sf, index.scale, x, &mut raw);
        } else {
            active_shifts(sf, index.scale, x, &mut raw);
        }
        let s: f64 = raw
            .iter()
            .filter(|(k, _)| (index.range.0..=index.range.1).contains(k))
            .map(|(_, v)| v * v)
            .sum();
        best = best.max(s);
    }
    best
}

/// `√(2k+1) P_k(2x − 1)` for `k = 0..=max_degree`.
pub fn shifted_legendre(max_degree: usize, x: f64) -> Vec<f64> {
    let t = 2.0 * x - 1.0;
    let mut p = Vec::with_capacity(max_degree + 1);
    p.push(1.0);
    if max_degree >= 1 {
        p.push(t);
    }
    for k in 1..max_degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * p[k] - kf * p[k - 1]) / (kf + 1.0);
        p.push(next);
    }
    p.iter()
        .enumerate()
        .map(|(k, v)| v * ((2 * k + 1) as f64).sqrt())
        .collect()
}

/// First `n` multi-indices in `ℕ^dim` by total degree, then descending
/// lexicographic order within a degree.
pub fn graded_multi_indices(dim: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n);
    let mut degree = 0;
    while out.len() < n {
        let mut grade = Vec::new();
        compositions(degree, dim, &mut Vec::with_capacity(dim), &mut grade);
        grade.sort_by(|a, b| b.cmp(a));
        for alpha in grade {
            if out.len() == n {
                break;
            }
            out.push(alpha);
        }
        degree += 1;
    }
    out
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}
