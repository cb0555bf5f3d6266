//! Pegasos with DPP minibatches on a synthetic two-class problem.
use dppss::data::gen_two_class;
use dppss::experiments::{run_pegasos_experiment, PegasosConfig};

fn main() -> dppss::Result<()> {
    let data = gen_two_class(400, 1)?;
    let cfg = PegasosConfig {
        iterations: 50,
        trials: 20,
        seed: 2,
        ..PegasosConfig::default()
    };
    let rows = run_pegasos_experiment(&data, &cfg)?;
    for r in rows.iter().filter(|r| r.t == cfg.iterations) {
        println!(
            "{:>4} t={} {:<22} {:.5} ± {:.5}",
            r.sampler, r.t, r.metric, r.value, r.stderr
        );
    }
    Ok(())
}
