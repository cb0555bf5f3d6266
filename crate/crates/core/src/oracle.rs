//! Brute-force ground truth for small discrete projection DPPs.

use std::collections::BTreeMap;

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;

use crate::discretize::DiscreteProjectionDpp;
use crate::{Error, Result};

/// Largest number of subsets [`enumerate_subset_probabilities`] will visit.
pub const ENUMERATION_LIMIT: u128 = 100_000;

/// `P(S = J) = det K_J` for every size-m subset `J`, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetProbabilityTable {
    pub subsets: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
}

impl SubsetProbabilityTable {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn probability(&self, subset: &[usize]) -> Option<f64> {
        self.subsets
            .binary_search_by(|s| s.as_slice().cmp(subset))
            .ok()
            .map(|i| self.probs[i])
    }

    /// Empirical frequencies laid out in table order. A sampled subset that
    /// the table does not contain is a support mismatch.
    pub fn align(&self, freqs: &SubsetFrequencies) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.subsets.len()];
        for (s, &p) in &freqs.freqs {
            let i = self
                .subsets
                .binary_search_by(|t| t.as_slice().cmp(s))
                .map_err(|_| Error::SupportMismatch)?;
            out[i] = p;
        }
        Ok(out)
    }

    /// Variance of `Σ_{i∈S} f_i` computed from the table.
    pub fn variance_of_sum(&self, values: &[f64]) -> f64 {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (s, &p) in self.subsets.iter().zip(&self.probs) {
            let l: f64 = s.iter().map(|&i| values[i]).sum();
            m1 += p * l;
            m2 += p * l * l;
        }
        m2 - m1 * m1
    }

    /// `P(i ∈ S)` for every item.
    pub fn marginals(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (s, &p) in self.subsets.iter().zip(&self.probs) {
            for &i in s {
                out[i] += p;
            }
        }
        out
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

pub fn enumerate_subset_probabilities(
    dpp: &DiscreteProjectionDpp,
) -> Result<SubsetProbabilityTable> {
    let n = dpp.len();
    let m = dpp.rank();
    let count = binomial(n, m);
    if count > ENUMERATION_LIMIT {
        return Err(Error::CostGuard(format!(
            "C({n}, {m}) = {count} subsets exceeds {ENUMERATION_LIMIT}"
        )));
    }
    let u = dpp.basis();
    let mut subsets = Vec::with_capacity(count as usize);
    let mut probs = Vec::with_capacity(count as usize);
    for subset in (0..n).combinations(m) {
        // K_J = U_J U_Jᵀ and det K_J = det(U_J)²
        let uj = DMatrix::from_fn(m, m, |r, c| u[(subset[r], c)]);
        let det = uj.lu().determinant();
        let p = det * det;
        probs.push(if p < 0.0 && p > -1e-12 { 0.0 } else { p });
        subsets.push(subset);
    }
    Ok(SubsetProbabilityTable { subsets, probs })
}

/// Normalized counts of sampled subsets (each sorted ascending).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubsetFrequencies {
    pub freqs: BTreeMap<Vec<usize>, f64>,
    pub trials: usize,
}

pub fn empirical_subset_frequencies<R: Rng + ?Sized>(
    dpp: &DiscreteProjectionDpp,
    trials: usize,
    rng: &mut R,
) -> Result<SubsetFrequencies> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..trials {
        *counts.entry(dpp.sample(rng)?).or_default() += 1;
    }
    Ok(SubsetFrequencies {
        freqs: counts
            .into_iter()
            .map(|(s, c)| (s, c as f64 / trials as f64))
            .collect(),
        trials,
    })
}

/// `½ Σ |p − q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch);
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(tv_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), 0.5);
        assert!(matches!(
            tv_distance(&[1.0], &[0.5, 0.5]),
            Err(Error::SupportMismatch)
        ));
    }

    #[test]
    fn rank_one_uniform_table() {
        let c = 1.0 / 3f64.sqrt();
        let dpp = DiscreteProjectionDpp::from_basis(DMatrix::from_column_slice(3, 1, &[c, c, c]))
            .unwrap();
        let t = enumerate_subset_probabilities(&dpp).unwrap();
        assert_eq!(t.subsets, vec![vec![0], vec![1], vec![2]]);
        for p in &t.probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_rank_is_deterministic() {
        let dpp = DiscreteProjectionDpp::from_basis(DMatrix::identity(4, 4)).unwrap();
        let t = enumerate_subset_probabilities(&dpp).unwrap();
        assert_eq!(t.subsets.len(), 1);
        assert!((t.probs[0] - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = empirical_subset_frequencies(&dpp, 50, &mut rng).unwrap();
        assert_eq!(f.freqs.len(), 1);
        assert_eq!(f.freqs[&vec![0, 1, 2, 3]], 1.0);
    }

    #[test]
    fn guard_and_binomial() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(40, 20), 137_846_528_820);
        let big = DiscreteProjectionDpp::from_basis(DMatrix::from_fn(40, 20, |i, j| {
            if i == j {
                1.0
            } else {
                0.0
            }
        }))
        .unwrap();
        assert!(matches!(
            enumerate_subset_probabilities(&big),
            Err(Error::CostGuard(_))
        ));
    }

    #[test]
    fn alignment_rejects_foreign_subsets() {
        let c = 1.0 / 3f64.sqrt();
        let dpp = DiscreteProjectionDpp::from_basis(DMatrix::from_column_slice(3, 1, &[c, c, c]))
            .unwrap();
        let t = enumerate_subset_probabilities(&dpp).unwrap();
        let mut f = SubsetFrequencies::default();
        f.freqs.insert(vec![0, 1], 1.0);
        assert!(matches!(t.align(&f), Err(Error::SupportMismatch)));
    }
}
