use clap::Parser;
use sqmlab::experiments::{run, EXPERIMENTS};
use sqmlab::report::ExperimentConfig;
use std::path::PathBuf;
use std::process::ExitCode;

/// Run one registered verification experiment and emit its report.
#[derive(Parser, Debug)]
#[command(name = "sqmlab", version, after_help = after_help())]
struct Cli {
    /// Experiment name.
    experiment: String,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for `<experiment>.json` / `.csv`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides every tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Emit JSON (default).
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV.
    #[arg(long)]
    csv: bool,
}

fn after_help() -> String {
    format!("Experiments: {}", EXPERIMENTS.join(", "))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !EXPERIMENTS.contains(&cli.experiment.as_str()) {
        eprintln!("unknown experiment {:?}\n{}", cli.experiment, after_help());
        return ExitCode::from(2);
    }
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(&cli.experiment, path),
        None => Ok(ExperimentConfig::new(&cli.experiment)),
    };
    let mut cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.tol = Some(t);
    }
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (body, ext) = if cli.csv { (report.to_csv(), "csv") } else { (report.to_json(), "json") };
    match &cli.out {
        Some(dir) => {
            let path = dir.join(format!("{}.{ext}", cfg.experiment));
            if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, &body)) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
            eprintln!(
                "{}: {}/{} cases pass, max_err {:.3e} -> {}",
                cfg.experiment,
                report.summary.cases - report.summary.failed,
                report.summary.cases,
                report.summary.max_err,
                path.display()
            );
        }
        None => print!("{body}"),
    }
    if report.summary.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
