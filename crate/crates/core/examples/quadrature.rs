//! Variance decay of DPP quadrature against iid Monte Carlo.
use dppss::estimators::DesignRule;
use dppss::experiments::{run_quadrature_experiment, QuadratureConfig, SamplerKind, WeightChoice};

fn main() -> dppss::Result<()> {
    for sampler in [
        SamplerKind::Iid,
        SamplerKind::Haar,
        SamplerKind::Db2,
        SamplerKind::Ope,
    ] {
        let cfg = QuadratureConfig {
            sampler,
            dim: 1,
            function: "gamma0.75".into(),
            weight: WeightChoice::Auto,
            design: DesignRule::default(),
            n_list: vec![4, 8, 16, 32, 64],
            trials: 300,
            seed: 42,
        };
        let summary = run_quadrature_experiment(&cfg)?;
        let mses: Vec<String> = summary
            .rows
            .iter()
            .map(|r| format!("{:.2e}", r.mse))
            .collect();
        println!(
            "{:>4}: slope {:+.2}   mse {}",
            sampler,
            summary.slope,
            mses.join(" ")
        );
    }
    Ok(())
}
