//! k-means coresets from discrete DPPs on the trimodal mixture.
use dppss::data::gen_gmm_trimodal;
use dppss::experiments::{run_coreset_experiment, CoresetConfig};

fn main() -> dppss::Result<()> {
    let data = gen_gmm_trimodal(1024, 3)?;
    let cfg = CoresetConfig {
        m_list: vec![16, 64],
        replicas: 40,
        candidates: 40,
        seed: 9,
        ..CoresetConfig::default()
    };
    println!("sampler    m  drawn   q90 rel. error   mean");
    for r in run_coreset_experiment(&data, &cfg)? {
        println!(
            "{:>7} {:>4} {:>6}   {:>14.4} {:>6.4}",
            r.sampler, r.m, r.m_actual, r.quantile, r.mean
        );
    }
    Ok(())
}
