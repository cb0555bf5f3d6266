//! Compare the exact discrete sampler against brute-force enumeration.
use dppss::discretize::{build_discrete_dpp, build_feature_matrix, DEFAULT_RANK_TOLERANCE};
use dppss::kernels::{IndexMode, ProjectionKernel};
use dppss::oracle::{empirical_subset_frequencies, enumerate_subset_probabilities, tv_distance};
use dppss::wavelets::ScalingFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dppss::Result<()> {
    let points: Vec<Vec<f64>> = [0.05, 0.2, 0.35, 0.6, 0.7, 0.95]
        .iter()
        .map(|&x| vec![x])
        .collect();
    let kernel = ProjectionKernel::wavelet(ScalingFunction::haar(), 1, 1, IndexMode::Interior)?;
    let psi = build_feature_matrix(&kernel, &points)?;
    let dpp = build_discrete_dpp(&psi, &[1.0; 6], DEFAULT_RANK_TOLERANCE)?;

    let table = enumerate_subset_probabilities(&dpp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let freqs = empirical_subset_frequencies(&dpp, 100_000, &mut rng)?;
    let emp = table.align(&freqs)?;
    for ((s, p), q) in table.subsets.iter().zip(&table.probs).zip(&emp) {
        if *p > 1e-12 {
            println!("{s:?}  exact {p:.4}  sampled {q:.4}");
        }
    }
    println!("total variation {:.5}", tv_distance(&table.probs, &emp)?);
    Ok(())
}
