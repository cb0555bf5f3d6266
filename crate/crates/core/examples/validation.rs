//! Run the quick self-check suites and print the report.
use dppss::validation::{run_validation, Effort, Suite, ValidationOptions};

fn main() -> dppss::Result<()> {
    let opts = ValidationOptions {
        seed: 1,
        tamper: false,
        effort: Effort::Quick,
    };
    let report = run_validation(&[Suite::Oracle, Suite::Partition, Suite::Formulas], &opts)?;
    for c in &report.checks {
        println!(
            "{:<12} {:<40} {}",
            c.suite.label(),
            c.name,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    println!("all passed: {}", report.passed());
    Ok(())
}
