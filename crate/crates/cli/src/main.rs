#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::KernelQuantity;

/// Solver and verification front end for the sublinear Fujita problem.
#[derive(Debug, Parser)]
#[command(name = "fujita", version, about)]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory [default: out; `exponents` only writes a file when given].
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for lattice evaluations and sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Corrupt the last frame before verification (testing the failure path).
    #[arg(long, global = true, hide = true)]
    inject_spike: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the PDE and write frames, the deviation series and diagnostics.
    Solve,
    /// Solve and run the full verification suite; exit 4 if any check fails.
    Verify,
    /// Sweep the exponents of the config, fit the algebraic rates and classify.
    Rate,
    /// Tabulate one kernel quantity on an (x, t) lattice.
    Kernels(KernelArgs),
    /// Print the critical exponents N/(N+2) and 1+2/N.
    Exponents {
        /// Largest dimension in the table.
        #[arg(long, default_value_t = 10)]
        n_max: u32,
    },
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// Exponent; defaults to the single exponent of --config.
    #[arg(long, value_parser = parse_exponent)]
    p: Option<f64>,

    #[arg(long, value_enum)]
    quantity: KernelQuantity,

    /// Spatial lattice `lo,hi,n`.
    #[arg(long, default_value = "-5,5,101", allow_hyphen_values = true)]
    x: String,

    /// Comma-separated times.
    #[arg(long, default_value = "1")]
    t: String,
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n
                .trim()
                .parse()
                .map_err(|_| format!("`{s}` is not a number"))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| format!("`{s}` is not a number"))?;
            n / d
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    Ok(v)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let outcome = match &cli.command {
        Command::Solve => commands::solve(cli.config.as_deref(), &out),
        Command::Verify => commands::verify(cli.config.as_deref(), &out, cli.inject_spike),
        Command::Rate => commands::rate(cli.config.as_deref(), &out),
        Command::Kernels(k) => {
            commands::kernels(cli.config.as_deref(), &out, k.p, k.quantity, &k.x, &k.t)
        }
        Command::Exponents { n_max } => commands::exponents(*n_max, cli.out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
