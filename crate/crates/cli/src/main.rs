use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use output::Table;

/// Analyse Khinchin families of power series.
#[derive(Debug, Parser)]
#[command(name = "khinchin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Class-K status, radius, M_f, support gaps and first coefficients.
    Describe(Common),
    /// ln f, mean, variance, sigma/m, L_f and E X^2/(E X)^2 on a grid.
    Stats(Common),
    /// Clan diagnosis on a grid approaching the radius.
    Clan(Common),
    /// Order-of-growth traces (entire functions).
    Order {
        #[command(flatten)]
        common: Common,
        /// Moment exponent of the moment trace.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Constructive inequality and identity checks; exit code 1 on failure.
    Verify {
        #[command(flatten)]
        common: Common,
        /// `full`, or a comma-separated list of check names.
        #[arg(long, default_value = "full")]
        suite: String,
    },
    /// Saddle-point coefficient estimates against exact coefficients.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Coefficient indices, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
    },
    /// Exact samples of X_t.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Local central limit deviation on a grid.
    Clt(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum PrecisionArg {
    Standard,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum ExecArg {
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
struct Common {
    /// Expression or built-in name (`partition`, `bell`, ...); `verify` without
    /// it runs the default corpus.
    #[arg(long = "f")]
    f: Option<String>,
    /// Truncation order for series expansion and class-K validation.
    #[arg(long, default_value_t = 512)]
    n_trunc: usize,
    /// Radius of convergence when it cannot be inferred (`inf` or a number).
    #[arg(long)]
    radius: Option<String>,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Standard)]
    precision: PrecisionArg,
    /// `default`, `geo:R:steps`, `geo:<t_max>:steps` or `t1,t2,...`.
    #[arg(long, default_value = "default")]
    grid: String,
    /// Inequality slack for verification (defaults depend on the precision).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = ExecArg::Parallel)]
    exec: ExecArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(outcome) => ExitCode::from(outcome),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// The result of a command before rendering.
pub struct Report {
    pub command: &'static str,
    pub config: serde_json::Value,
    pub results: serde_json::Value,
    pub table: Table,
    /// Process exit status.
    pub status: u8,
}
