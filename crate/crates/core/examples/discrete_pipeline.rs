//! Turn a continuous kernel into a discrete projection DPP on a dataset,
//! with the density replaced by a KDE.
use dppss::data::gen_gmm_trimodal;
use dppss::density::KdeKernel;
use dppss::discretize::{error_functional, TransferBoundInputs};
use dppss::experiments::{DiscretePipeline, SamplerKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dppss::Result<()> {
    let data = gen_gmm_trimodal(1000, 5)?;
    let pipe =
        DiscretePipeline::with_kde(SamplerKind::Haar, 64, &data.points, KdeKernel::Epanechnikov)?;
    let pi = pipe.dpp.inclusion_probabilities();
    println!("N = {}, rank = {}", pipe.dpp.len(), pipe.dpp.rank());
    println!(
        "inclusion probabilities: sum {:.6}, max {:.4}",
        pi.iter().sum::<f64>(),
        pi.iter().cloned().fold(0.0, f64::max)
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = pipe.dpp.sample(&mut rng)?;
    println!(
        "one sample: {} distinct indices, first few {:?}",
        s.len(),
        &s[..5.min(s.len())]
    );

    let (e, e_tilde) = error_functional(&TransferBoundInputs {
        n: pipe.dpp.rank(),
        big_n: pipe.dpp.len() as f64,
        delta: 0.05,
        delta_prime: 0.05,
    })?;
    println!("error functionals at this size: {e:.4} / {e_tilde:.4}");
    Ok(())
}
