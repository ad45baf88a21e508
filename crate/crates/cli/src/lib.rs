//! `opgraph` command-line front end.
//!
//! Exit codes: 0 when every check matches the predicted outcome, 1 when a
//! mathematical check fails, 2 on usage, parse or input errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod expr;
pub mod io;
pub mod report;

use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] opgraph_core::Error),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use opgraph_core::Error as E;
        match self {
            CliError::Core(E::DegenerateRandomElement { .. } | E::NoExactSplitting) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    /// Exact when theta is a Gaussian rational, float otherwise.
    Auto,
    Exact,
    Float,
}

impl BackendChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendChoice::Auto => "auto",
            BackendChoice::Exact => "exact",
            BackendChoice::Float => "float",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelAction {
    /// Dimension and basis of the non-commutative graph.
    Graph,
    /// Compare the graph with the image of the dual complementary channel.
    GraphCheck,
    /// Randomized check of Tr(rho dual(x)) = Tr(apply(rho) x).
    DualityTest,
    /// Compare the graph with span L(theta) (needs --theta).
    #[value(name = "match-L", alias = "match-l")]
    MatchL,
}

impl ChannelAction {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelAction::Graph => "graph",
            ChannelAction::GraphCheck => "graph-check",
            ChannelAction::DualityTest => "duality-test",
            ChannelAction::MatchL => "match-L",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    #[arg(long, global = true, value_enum, default_value = "auto")]
    pub backend: BackendChoice,
    /// Rank and residual tolerance on the float backend.
    #[arg(long, global = true, default_value_t = opgraph_core::scalar::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run every check for one theta.
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
    },
    /// Tabulate dim M_theta, blocks and dim Ker psi over many theta.
    Sweep {
        /// `unit-circle:n=N` or a comma-separated list of theta values.
        #[arg(long, visible_alias = "range", allow_hyphen_values = true)]
        theta: String,
    },
    /// Normal form and psi-image of an element of A_theta.
    Fp {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Element such as "2*x*g - 1/3*z + g^2".
        #[arg(allow_hyphen_values = true)]
        expr: String,
        /// Multiply on the right by this element.
        #[arg(long, allow_hyphen_values = true)]
        times: Option<String>,
    },
    /// Decompose the four-dimensional representation into irreducibles.
    Rep {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
    },
    /// Channel identities for a channel or Gram-frame JSON file.
    Channel {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum, default_value = "graph")]
        action: ChannelAction,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        /// Random (rho, x) pairs for duality-test.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "opgraph",
    version,
    about = "Checks for the operator graph L(theta) and its algebras"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Verify { theta } => commands::verify(theta, &cli.global),
        Command::Sweep { theta } => commands::sweep(theta, &cli.global),
        Command::Fp { theta, expr, times } => {
            commands::fp(theta, expr, times.as_deref(), &cli.global)
        }
        Command::Rep { theta } => commands::rep(theta, &cli.global),
        Command::Channel {
            file,
            action,
            theta,
            trials,
        } => commands::channel(file, *action, theta.as_deref(), *trials, &cli.global),
    }
}

/// Parses arguments, runs the command, writes the report and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let rendered = if cli.global.json {
        report.to_json()
    } else {
        report.to_text()
    };
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{rendered}"),
    }
    if report.passed {
        0
    } else {
        1
    }
}
