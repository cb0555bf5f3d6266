//! Exact samples from continuous projection DPPs on the unit square.
use dppss::continuous_sampler::{sample, sample_stratified_haar};
use dppss::kernels::{IndexMode, ProjectionKernel};
use dppss::wavelets::ScalingFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dppss::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let haar = sample_stratified_haar(2, 2, &mut rng);
    println!("haar j=2 (one point per cell):");
    for p in haar.iter() {
        println!("  ({:.3}, {:.3})", p[0], p[1]);
    }

    let db2 =
        ProjectionKernel::wavelet(ScalingFunction::daubechies2()?, 2, 2, IndexMode::Periodized)?;
    let ope = ProjectionKernel::ope(2, 16)?;
    for k in [&db2, &ope] {
        let s = sample(k, &mut rng)?;
        let xs: Vec<String> = s
            .iter()
            .map(|p| format!("({:.2},{:.2})", p[0], p[1]))
            .collect();
        println!("{} ({} points): {}", k.label(), s.len(), xs.join(" "));
    }
    Ok(())
}
