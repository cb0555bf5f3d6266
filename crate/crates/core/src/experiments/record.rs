use std::io::Write;

use crate::Result;

/// One trial's output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub sampler: String,
    pub n: usize,
    pub trial: u64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

impl ExperimentRecord {
    pub const HEADER: [&'static str; 7] = [
        "experiment",
        "sampler",
        "n",
        "trial",
        "seed",
        "metric",
        "value",
    ];

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.sampler.clone(),
            self.n.to_string(),
            self.trial.to_string(),
            self.seed.to_string(),
            self.metric.clone(),
            self.value.to_string(),
        ]
    }
}

/// Writes a header and rows as UTF-8 CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
