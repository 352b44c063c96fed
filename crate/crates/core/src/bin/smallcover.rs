use clap::{Args, Parser, Subcommand};
use smallcover::cli::{extract_csv, render_report, run, Overrides, EXIT_CONFIG};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exact small-cover toolkit: expected suprema, threshold families, witness
/// covers, counting classes, dyadic reduction and lemma verification.
#[derive(Parser)]
#[command(name = "smallcover", version, about)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// RNG seed (required in mc mode)
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<u64>,
    /// exact or mc
    #[arg(long)]
    mode: Option<String>,
    /// Enumeration budget (states)
    #[arg(long)]
    budget: Option<u64>,
    /// Report file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop the verify suite at the first violation
    #[arg(long)]
    fail_fast: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Expected supremum of the process, exact or Monte Carlo
    Estimate(Common),
    /// Enumerate the threshold family
    Family(Common),
    /// Witness trace for a configuration x against a bad replica matrix y
    Witness(Common),
    /// Witness cover of the family for a bad replica matrix y
    Cover(Common),
    /// Counting-class partition of all witness sets
    Classes(Common),
    /// Continuous-to-discrete pipeline with cover lifting
    Reduce(Common),
    /// Lemma verification, single instance or random suite
    Verify(Common),
    /// Bernoulli specialization: subset family with its union-bound weight
    Selector(Common),
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::Estimate(c) => ("estimate", c),
            Command::Family(c) => ("family", c),
            Command::Witness(c) => ("witness", c),
            Command::Cover(c) => ("cover", c),
            Command::Classes(c) => ("classes", c),
            Command::Reduce(c) => ("reduce", c),
            Command::Verify(c) => ("verify", c),
            Command::Selector(c) => ("selector", c),
        }
    }
}

fn main() -> ExitCode {
    let cli = CliArgs::parse();
    let (name, common) = cli.command.split();
    let config_text = match std::fs::read_to_string(&common.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", common.config.display());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let overrides = Overrides {
        seed: common.seed,
        samples: common.samples,
        mode: common.mode.clone(),
        budget: common.budget,
        fail_fast: common.fail_fast,
    };
    let outcome = run(name, &config_text, &overrides);
    let rendered = render_report(&outcome.report);
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG as u8);
            }
            if let Some(csv) = extract_csv(&outcome.report) {
                let csv_path = path.with_extension("csv");
                if let Err(e) = std::fs::write(&csv_path, csv) {
                    eprintln!("cannot write {}: {e}", csv_path.display());
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            }
        }
        None => print!("{rendered}"),
    }
    ExitCode::from(outcome.exit as u8)
}
