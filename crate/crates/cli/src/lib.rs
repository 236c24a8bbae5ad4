//! Command-line front end for `biconf-core`.
//!
//! ```text
//! biconf verify        --sigma EXPR --rho EXPR [--grid SPEC] [--h H]
//! biconf residual      --sigma EXPR --rho EXPR --A A [--grid SPEC]
//! biconf solve-family  --alpha A --beta B [--b B] [--rho0 R] | --ricci-flat [--a A]
//! biconf solve-warped  [--B B] [--C C | --Ctilde C] [--alpha0 ..] [--gamma0 ..] [--delta0 ..]
//! biconf examples      list | run NAME
//! ```
//!
//! Every command accepts `--config FILE`, `--tol`, `--out` and `--format csv|json`.
//! Exit codes: 0 success, 1 validation or parse error, 2 numerical failure,
//! 3 tolerance exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use error::EXIT_VALIDATION;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "biconf", version, about = "Einstein metrics from biconformal deformations of R^4")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the closed-form coordinate Ricci tensor with the finite-difference oracle on a grid.
    Verify(ScanArgs),
    /// Evaluate the ten Einstein residuals on a grid.
    Residual(ScanArgs),
    /// Integrate the single-parameter family and report its ends.
    SolveFamily(FamilyArgs),
    /// Integrate the warped-product ODE and track its conserved quantity.
    SolveWarped(WarpedArgs),
    /// List or run the named examples.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExamplesAction {
    List,
    Run { name: String },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// `key = value` file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// Einstein constant.
    #[arg(long = "A", allow_negative_numbers = true)]
    pub a_const: Option<f64>,
    /// `x1=lo:hi:n,...`; unspecified axes use -0.4:0.4:5.
    #[arg(long)]
    pub grid: Option<String>,
    /// Step for metric derivatives; Christoffel derivatives use 10 h.
    #[arg(long)]
    pub h: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho0: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Treat blow-up as a failure (exit 2).
    #[arg(long)]
    pub expect_complete: bool,
    /// Use the closed-form profile sigma = a t^(1/4), rho = t^(-1/2) instead.
    #[arg(long)]
    pub ricci_flat: bool,
    #[arg(long)]
    pub a: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WarpedArgs {
    #[arg(long = "B", allow_negative_numbers = true)]
    pub b_const: Option<f64>,
    #[arg(long = "C", allow_negative_numbers = true)]
    pub c_const: Option<f64>,
    #[arg(long = "Ctilde", allow_negative_numbers = true)]
    pub ctilde: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Runs the CLI; `env` looks up environment variables.
pub fn run<I, T>(
    args: I,
    env: &dyn Fn(&str) -> Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match commands::dispatch(&cli.command, env, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
