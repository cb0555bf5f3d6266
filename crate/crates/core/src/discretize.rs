//! From a continuous projection kernel to a discrete projection DPP on a
//! dataset.
//!
//! Given features `ψ_1, …, ψ_n` and data `X_1, …, X_N` with density values
//! `ρ(X_i)`, the L-ensemble `L = N^{-1} D(ρ^{-1/2}) Ψ Ψᵀ D(ρ^{-1/2})` is
//! written `L = B Bᵀ` with `B = N^{-1/2} D(ρ^{-1/2}) Ψ`. Its m-DPP with
//! `m = rank(Ψ)` is the projection DPP onto the range of `B`. An orthonormal
//! basis `U` of that range comes from the `n × n` Gram matrix `Bᵀ B`, so no
//! `N × N` matrix is ever formed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::kernels::ProjectionKernel;
use crate::{Error, Result};

/// Relative eigenvalue cutoff used to decide the numerical rank.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// `Ψ[i][k] = ψ_k(X_i)`, an `N × n` matrix.
#[derive(Debug, Clone)]
pub struct FeatureMatrix(pub DMatrix<f64>);

impl FeatureMatrix {
    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }
}

pub fn build_feature_matrix(
    kernel: &ProjectionKernel,
    points: &[Vec<f64>],
) -> Result<FeatureMatrix> {
    let n = kernel.rank();
    let mut psi = DMatrix::zeros(points.len(), n);
    let mut feat = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if p.len() != kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::OutOfDomain { index: i });
        }
        kernel.sparse_features(p, &mut feat)?;
        for &(k, v) in &feat {
            psi[(i, k)] = v;
        }
    }
    Ok(FeatureMatrix(psi))
}

/// A rank-m projection DPP on `{0, …, N−1}` with kernel `K = U Uᵀ`.
#[derive(Debug, Clone)]
pub struct DiscreteProjectionDpp {
    /// `N × m`, orthonormal columns.
    u: DMatrix<f64>,
    /// Retained eigenvalues of `L`, descending.
    eigenvalues: Vec<f64>,
    /// Absolute eigenvalue threshold that was applied.
    threshold: f64,
    inclusion: Vec<f64>,
}

impl DiscreteProjectionDpp {
    /// Builds the DPP directly from an orthonormal basis.
    pub fn from_basis(u: DMatrix<f64>) -> Result<Self> {
        if u.ncols() == 0 {
            return Err(Error::ZeroRank);
        }
        let inclusion = row_norms(&u);
        Ok(DiscreteProjectionDpp {
            eigenvalues: vec![1.0; u.ncols()],
            threshold: 0.0,
            u,
            inclusion,
        })
    }

    pub fn len(&self) -> usize {
        self.u.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.u.nrows() == 0
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `K_ii = ‖U_i‖²`, the probability that item `i` is selected.
    pub fn inclusion_probability(&self, i: usize) -> Result<f64> {
        self.inclusion
            .get(i)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
    }

    pub fn inclusion_probabilities(&self) -> &[f64] {
        &self.inclusion
    }

    /// `K_ij = ⟨U_i, U_j⟩`.
    pub fn kernel_entry(&self, i: usize, j: usize) -> f64 {
        self.u.row(i).dot(&self.u.row(j))
    }

    /// Exact sampler: `m` rounds of "pick `i` with probability `D_i / Σ D`,
    /// then project every row orthogonally to the picked row's residual".
    /// Returns the selected indices in increasing order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<usize>> {
        let m = self.rank();
        let mut residual = self.inclusion.clone();
        let mut dirs: Vec<DVector<f64>> = Vec::with_capacity(m);
        let mut picked = Vec::with_capacity(m);
        for _ in 0..m {
            for r in residual.iter_mut() {
                if *r < -1e-9 {
                    return Err(Error::NegativeResidual { value: *r });
                }
                *r = r.max(0.0);
            }
            let total: f64 = residual.iter().sum();
            let mut target = rng.random::<f64>() * total;
            let mut chosen = residual.len() - 1;
            for (i, &r) in residual.iter().enumerate() {
                if target < r {
                    chosen = i;
                    break;
                }
                target -= r;
            }
            // guard against landing on a zero entry through round-off
            while residual[chosen] <= 0.0 && chosen > 0 {
                chosen -= 1;
            }
            let mut v: DVector<f64> = self.u.row(chosen).transpose();
            for _ in 0..2 {
                for e in &dirs {
                    let c = v.dot(e);
                    v.axpy(-c, e, 1.0);
                }
            }
            let norm = v.norm();
            if norm <= 0.0 {
                return Err(Error::NegativeResidual { value: 0.0 });
            }
            v /= norm;
            let proj = &self.u * &v;
            for (r, c) in residual.iter_mut().zip(proj.iter()) {
                *r -= c * c;
            }
            residual[chosen] = 0.0;
            dirs.push(v);
            picked.push(chosen);
        }
        picked.sort_unstable();
        Ok(picked)
    }
}

fn row_norms(u: &DMatrix<f64>) -> Vec<f64> {
    (0..u.nrows()).map(|i| u.row(i).norm_squared()).collect()
}

/// Builds the discrete projection DPP of the L-ensemble
/// `L = N^{-1} D(ρ^{-1/2}) Ψ Ψᵀ D(ρ^{-1/2})`.
///
/// Eigenpairs of `G = BᵀB` with eigenvalue above `rel_tol · λ_max` are kept;
/// `U = B V Λ^{-1/2}`, re-orthonormalized, with each column's
/// largest-magnitude entry made positive.
pub fn build_discrete_dpp(
    psi: &FeatureMatrix,
    rho: &[f64],
    rel_tol: f64,
) -> Result<DiscreteProjectionDpp> {
    let n_data = psi.nrows();
    if rho.len() != n_data {
        return Err(Error::DimensionMismatch {
            expected: n_data,
            got: rho.len(),
        });
    }
    if n_data == 0 {
        return Err(Error::ZeroRank);
    }
    if let Some((i, &v)) = rho.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveDensity { index: i, value: v });
    }
    let scale = 1.0 / (n_data as f64).sqrt();
    let mut b = psi.0.clone();
    for (i, mut row) in b.row_iter_mut().enumerate() {
        row *= scale / rho[i].sqrt();
    }
    let gram = b.transpose() * &b;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let lambda_max = order.first().map_or(0.0, |&i| eig.eigenvalues[i]);
    if !(lambda_max > 0.0) {
        return Err(Error::ZeroRank);
    }
    let threshold = rel_tol * lambda_max;
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| eig.eigenvalues[i] > threshold)
        .collect();
    let m = kept.len();
    let mut u = DMatrix::zeros(n_data, m);
    for (c, &i) in kept.iter().enumerate() {
        let col = &b * eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt();
        u.set_column(c, &col);
    }
    orthonormalize_columns(&mut u);
    for mut col in u.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    let eigenvalues = kept.iter().map(|&i| eig.eigenvalues[i]).collect();
    let inclusion = row_norms(&u);
    Ok(DiscreteProjectionDpp {
        u,
        eigenvalues,
        threshold,
        inclusion,
    })
}

/// Two passes of modified Gram–Schmidt.
fn orthonormalize_columns(u: &mut DMatrix<f64>) {
    let m = u.ncols();
    for _ in 0..2 {
        for c in 0..m {
            for prev in 0..c {
                let dot = u.column(c).dot(&u.column(prev));
                let p = u.column(prev).clone_owned();
                u.column_mut(c).axpy(-dot, &p, 1.0);
            }
            let norm = u.column(c).norm();
            u.column_mut(c).unscale_mut(norm);
        }
    }
}

/// Inputs of the variance-transfer error functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferBoundInputs {
    pub n: usize,
    pub big_n: f64,
    pub delta: f64,
    pub delta_prime: f64,
}

/// The two error functionals, `(𝓔, 𝓔̃)`:
///
/// ```text
/// 𝓔  = 4 √(2 log(2/δ′) / N) + 4/(9N²) log²((n²+1)/δ) + 4/N log((n²+1)/δ)
/// 𝓔̃ = 4 √(2 log(2/δ′) / N) + (n+4)/(9N²) log²((n²+1)/δ) + (n+4)/N log((n²+1)/δ)
/// ```
pub fn error_functional(inp: &TransferBoundInputs) -> Result<(f64, f64)> {
    for (name, v) in [("delta", inp.delta), ("delta'", inp.delta_prime)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} is outside (0, 1)"
            )));
        }
    }
    if !(inp.big_n > 0.0) {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let big_n = inp.big_n;
    let n = inp.n as f64;
    let lead = 4.0 * (2.0 * (2.0 / inp.delta_prime).ln() / big_n).sqrt();
    let log_term = ((n * n + 1.0) / inp.delta).ln();
    let quad = log_term * log_term / (9.0 * big_n * big_n);
    let lin = log_term / big_n;
    Ok((
        lead + 4.0 * quad + 4.0 * lin,
        lead + (n + 4.0) * quad + (n + 4.0) * lin,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::IndexMode;
    use crate::wavelets::ScalingFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn haar(j: u32) -> ProjectionKernel {
        ProjectionKernel::wavelet(ScalingFunction::haar(), j, 1, IndexMode::Interior).unwrap()
    }

    #[test]
    fn feature_matrix_examples() {
        let psi = build_feature_matrix(&haar(1), &[vec![0.2], vec![0.7]]).unwrap();
        let s = std::f64::consts::SQRT_2;
        assert_eq!(psi.0, DMatrix::from_row_slice(2, 2, &[s, 0.0, 0.0, s]));
        let ope = ProjectionKernel::ope(1, 1).unwrap();
        let psi = build_feature_matrix(&ope, &[vec![0.1], vec![0.5], vec![0.9]]).unwrap();
        assert!(psi.0.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(matches!(
            build_feature_matrix(&ope, &[vec![1.5]]),
            Err(Error::OutOfDomain { index: 0 })
        ));
        let empty = build_feature_matrix(&ope, &[]).unwrap();
        assert!(matches!(
            build_discrete_dpp(&empty, &[], 1e-10),
            Err(Error::ZeroRank)
        ));
    }

    #[test]
    fn gram_of_features_reproduces_kernel() {
        let db2 = ScalingFunction::daubechies2().unwrap();
        let k = ProjectionKernel::wavelet(db2, 2, 2, IndexMode::Periodized).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random(), rng.random()]).collect();
        let psi = build_feature_matrix(&k, &pts).unwrap();
        let kk = &psi.0 * psi.0.transpose();
        for i in 0..20 {
            for j in 0..20 {
                assert!((kk[(i, j)] - k.eval(&pts[i], &pts[j]).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_point_haar_pipeline_is_identity() {
        let psi = build_feature_matrix(&haar(1), &[vec![0.2], vec![0.7]]).unwrap();
        let dpp = build_discrete_dpp(&psi, &[1.0, 1.0], DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(dpp.rank(), 2);
        for &l in dpp.eigenvalues() {
            assert!((l - 1.0).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(dpp.sample(&mut rng).unwrap(), vec![0, 1]);
        }
    }

    #[test]
    fn rank_one_uniform() {
        let ope = ProjectionKernel::ope(1, 1).unwrap();
        let psi = build_feature_matrix(&ope, &[vec![0.1], vec![0.5], vec![0.9]]).unwrap();
        let dpp = build_discrete_dpp(&psi, &[1.0; 3], DEFAULT_RANK_TOLERANCE).unwrap();
        let c = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert!((dpp.basis()[(i, 0)] - c).abs() < 1e-12);
            assert!((dpp.inclusion_probability(i).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(matches!(
            dpp.inclusion_probability(3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn basis_is_orthonormal_and_rows_match_l_entries() {
        let db2 = ScalingFunction::daubechies2().unwrap();
        let k = ProjectionKernel::wavelet(db2, 3, 1, IndexMode::Periodized).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vec<f64>> = (0..300).map(|_| vec![rng.random()]).collect();
        let rho: Vec<f64> = pts.iter().map(|p| 0.5 + p[0]).collect();
        let psi = build_feature_matrix(&k, &pts).unwrap();
        let dpp = build_discrete_dpp(&psi, &rho, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(dpp.rank(), 8);
        let utu = dpp.basis().transpose() * dpp.basis();
        for i in 0..8 {
            for j in 0..8 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((utu[(i, j)] - t).abs() < 1e-10);
            }
        }
        let total: f64 = dpp.inclusion_probabilities().iter().sum();
        assert!((total - 8.0).abs() < 1e-8);
        assert!(dpp
            .inclusion_probabilities()
            .iter()
            .all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
        // L = U diag(λ) Uᵀ and L_ij = K(X_i, X_j) / (N √(ρ_i ρ_j))
        let n = pts.len() as f64;
        for &(i, j) in &[(0usize, 0usize), (3, 17), (42, 43), (100, 250)] {
            let l_direct = k.eval(&pts[i], &pts[j]).unwrap() / (n * (rho[i] * rho[j]).sqrt());
            let l_spec: f64 = (0..8)
                .map(|c| dpp.eigenvalues()[c] * dpp.basis()[(i, c)] * dpp.basis()[(j, c)])
                .sum();
            assert!((l_direct - l_spec).abs() < 1e-12);
        }
        // sign convention
        for col in dpp.basis().column_iter() {
            let pivot = col
                .iter()
                .copied()
                .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            assert!(pivot > 0.0);
        }
    }

    #[test]
    fn rank_deficient_features_reduce_m() {
        // all points in the left half: only one Haar cell is occupied
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![0.04 * i as f64]).collect();
        let psi = build_feature_matrix(&haar(1), &pts).unwrap();
        let dpp = build_discrete_dpp(&psi, &[1.0; 10], DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(dpp.rank(), 1);
        assert!(matches!(
            build_discrete_dpp(
                &psi,
                &[1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
                1e-10
            ),
            Err(Error::NonPositiveDensity { index: 1, .. })
        ));
    }

    #[test]
    fn eigenvalues_concentrate_for_uniform_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Vec<f64>> = (0..10_000).map(|_| vec![rng.random()]).collect();
        let psi = build_feature_matrix(&haar(2), &pts).unwrap();
        let dpp = build_discrete_dpp(&psi, &vec![1.0; pts.len()], DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(dpp.rank(), 4);
        assert!(dpp.eigenvalues().iter().all(|&l| (0.8..=1.2).contains(&l)));
    }

    #[test]
    fn sampler_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let id = DiscreteProjectionDpp::from_basis(DMatrix::identity(4, 4)).unwrap();
        for _ in 0..20 {
            assert_eq!(id.sample(&mut rng).unwrap(), vec![0, 1, 2, 3]);
        }
        let e1 = DiscreteProjectionDpp::from_basis(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]))
            .unwrap();
        for _ in 0..20 {
            assert_eq!(e1.sample(&mut rng).unwrap(), vec![0]);
        }
    }

    #[test]
    fn error_functional_values() {
        let inp = TransferBoundInputs {
            n: 4,
            big_n: 1e4,
            delta: 0.1,
            delta_prime: 0.1,
        };
        let (e, et) = error_functional(&inp).unwrap();
        // 4 √(2 ln 20 / 1e4) = 0.0979099, 4/(9e8) ln²170 = 1.172e-7, 4e-4 ln 170 = 2.0543e-3
        let lead = 4.0 * (2.0 * 20f64.ln() / 1e4).sqrt();
        assert!((lead - 0.097_909_9).abs() < 1e-6);
        assert!((e - 0.099_964_3).abs() < 1e-6, "{e}");
        assert!((et - 0.102_018_7).abs() < 1e-6, "{et}");
        assert!(et > e);
        let big = TransferBoundInputs { big_n: 1e12, ..inp };
        assert!(error_functional(&big).unwrap().0 < 1e-4);
        let bad = TransferBoundInputs { delta: 1.0, ..inp };
        assert!(error_functional(&bad).is_err());
        let mut last = f64::INFINITY;
        for p in 1..=12 {
            let v = error_functional(&TransferBoundInputs {
                big_n: 10f64.powi(p),
                ..inp
            })
            .unwrap()
            .0;
            assert!(v < last);
            last = v;
        }
    }
}
