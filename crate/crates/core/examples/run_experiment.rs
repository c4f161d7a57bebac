//! Running a registered experiment from code and writing its report.
//!
//! ```bash
//! cargo run --example run_experiment -- anomaly-scan
//! ```

use sqmlab::experiments::{run, EXPERIMENTS};
use sqmlab::report::ExperimentConfig;

fn main() -> sqmlab::error::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "trace-theorem".into());
    let mut cfg = ExperimentConfig::parse(&name, "seed = 42\ncases = 10\n")?;
    cfg.set("tol.identity", 1e-11);
    let report = run(&cfg)?;
    for case in report.cases.iter().take(5) {
        println!("{:<24} err {:.2e} pass {}", case.key, case.abs_err, case.pass);
    }
    println!("{} of {} pass, max_err {:.2e}", report.summary.cases - report.summary.failed, report.summary.cases, report.summary.max_err);
    println!("available: {}", EXPERIMENTS.join(", "));
    Ok(())
}
