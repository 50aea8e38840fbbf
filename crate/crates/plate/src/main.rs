use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hho_plate::{run, RunConfig};

#[derive(Parser)]
#[command(name = "hho-plate", version, about = "HHO solvers for the clamped plate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark driver.
    Run(RunArgs),
}

/// Flags override the values of the config file.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// source_uniform | source_adaptive | eigen_adaptive | manufactured
    #[arg(long)]
    mode: Option<String>,
    /// lshape | unit_square
    #[arg(long)]
    domain: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// `auto` (k+2) or an integer.
    #[arg(long, allow_hyphen_values = true)]
    ell: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long = "eig_index", allow_hyphen_values = true, alias = "eig-index")]
    eig_index: Option<String>,
    #[arg(long = "max_ndof", allow_hyphen_values = true, alias = "max-ndof")]
    max_ndof: Option<String>,
    #[arg(long = "output_dir", alias = "output-dir")]
    output_dir: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    #[arg(long)]
    timing: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("mode", &self.mode),
            ("domain", &self.domain),
            ("k", &self.k),
            ("ell", &self.ell),
            ("sigma", &self.sigma),
            ("theta", &self.theta),
            ("eig_index", &self.eig_index),
            ("max_ndof", &self.max_ndof),
            ("output_dir", &self.output_dir),
            ("seed", &self.seed),
            ("timing", &self.timing),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect()
    }
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let overrides = args.overrides();
    let cfg = match &args.config {
        Some(path) => RunConfig::from_file(path, &overrides),
        None => RunConfig::parse("", &overrides),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
