use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ttns_cli::commands::{
    certify_batch, certify_files, decompose, gen, parse_alphas, parse_dims, parse_seed_range, profile_files,
    CertifyArgs, GenArgs, PlanArgs,
};
use ttns_cli::{CliError, Result};

const DEFAULT_ALPHAS: &str = "0.25,0.5,0.75,1.5,2,4";

/// Exact and truncated tree tensor network states with entropy-based
/// error and bond-dimension bounds.
#[derive(Parser)]
#[command(name = "ttns", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a state file: product, bell_pair, ghz, w, random or ground.
    Gen {
        kind: String,
        /// Comma-separated local dimensions.
        #[arg(long)]
        dims: Option<String>,
        /// Take the dimensions from a tree file.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Hamiltonian description for `ground`.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact decomposition into a TTNS container.
    Decompose {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Truncate, check every bound and write a report. Exit status 1 when
    /// any bound fails.
    Certify {
        #[arg(long, required_unless_present = "seed_range")]
        state: Option<PathBuf>,
        /// Tree file; optional in batch mode, where random qubit trees are drawn.
        #[arg(long)]
        tree: Option<PathBuf>,
        #[command(flatten)]
        plan: PlanFlags,
        #[arg(long, default_value = DEFAULT_ALPHAS)]
        alphas: String,
        /// Batch mode: one random instance per seed in `a..b`.
        #[arg(long, conflicts_with = "state")]
        seed_range: Option<String>,
        /// Sites per random tree in batch mode.
        #[arg(long, default_value_t = 8)]
        sites: usize,
        /// Report file (single mode) or directory (batch mode).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Embed spectra of any length.
        #[arg(long)]
        full_spectra: bool,
    },
    /// Per-edge Rényi entropies and bond-dimension brackets.
    Profile {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long, default_value = DEFAULT_ALPHAS)]
        alphas: String,
        /// Per-edge truncation budget for the brackets.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// JSON output file; the text table always goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PlanFlags {
    /// One cap for all edges or a comma-separated list.
    #[arg(long)]
    caps: Option<String>,
    /// Per-edge truncation budget.
    #[arg(long)]
    eps: Option<f64>,
    /// Total accuracy budget.
    #[arg(long)]
    delta: Option<f64>,
    /// How --delta is split across edges: even or entropy.
    #[arg(long)]
    split: Option<String>,
    /// Plan file.
    #[arg(long)]
    plan: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { kind, dims, tree, spec, seed, out } => {
            let dims = dims.as_deref().map(parse_dims).transpose()?;
            println!("{}", gen(&GenArgs { kind, dims, tree, spec, seed, out })?);
            Ok(true)
        }
        Command::Decompose { state, tree, out } => {
            print!("{}", decompose(&state, &tree, &out)?);
            Ok(true)
        }
        Command::Certify { state, tree, plan, alphas, seed_range, sites, out, full_spectra } => {
            let plan = PlanArgs { caps: plan.caps, eps: plan.eps, delta: plan.delta, plan: plan.plan, split: plan.split };
            let alphas = parse_alphas(&alphas)?;
            let args = CertifyArgs { plan: &plan, alphas: &alphas, full_spectra };
            if let Some(range) = seed_range {
                let outcomes = certify_batch(parse_seed_range(&range)?, sites, tree.as_deref(), &args, out.as_deref())?;
                for o in &outcomes {
                    println!("seed {:>6}  {}", o.seed, if o.verdict { "pass" } else { "FAIL" });
                }
                let passed = outcomes.iter().filter(|o| o.verdict).count();
                println!("{passed}/{} instances pass", outcomes.len());
                return Ok(passed == outcomes.len());
            }
            let tree = tree.ok_or_else(|| CliError::Usage("certify needs --tree".into()))?;
            let report = certify_files(&state.expect("clap enforces --state"), &tree, &args)?;
            let json = report.to_json();
            match out {
                Some(path) => {
                    fs::write(&path, &json)?;
                    let (p, t) = report.passed_bounds();
                    println!(
                        "verdict: {} ({p}/{t} rows pass), delta_projector {:.6e}, report {}",
                        if report.verdict { "pass" } else { "FAIL" },
                        report.global.delta_projector,
                        path.display()
                    );
                }
                None => print!("{json}"),
            }
            Ok(report.verdict)
        }
        Command::Profile { state, tree, alphas, eps, out } => {
            let report = profile_files(&state, &tree, &parse_alphas(&alphas)?, eps)?;
            if let Some(path) = out {
                fs::write(path, report.to_json())?;
            }
            print!("{}", report.to_table());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
