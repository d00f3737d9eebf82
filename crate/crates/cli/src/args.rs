//! Command line arguments.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use gradgauge::gauge::Format;

use crate::parser::parse;
use crate::run::{run_timed, Algebra, Command};

#[derive(Debug, Parser)]
#[command(name = "gradgauge", version, about = "Exact gauging of sigma models from graded geometry")]
pub struct Cli {
    /// Add wall-clock timing to the report (makes it non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgebraArg {
    G,
    Gtilde,
}

impl From<AlgebraArg> for Algebra {
    fn from(a: AlgebraArg) -> Self {
        match a {
            AlgebraArg::G => Algebra::G,
            AlgebraArg::Gtilde => Algebra::GTilde,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum CheckKind {
    /// Twisted Poisson condition for the declared bivector.
    Poisson { model: PathBuf },
    /// Isotropy and involutivity of the declared Dirac structure.
    Dirac { model: PathBuf },
    /// Integrability of the orthogonal operator.
    Gjac { model: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    #[command(subcommand)]
    Check(CheckKind),
    /// Degree-bounded basis of the symmetry space.
    Symmetries {
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long, value_enum, default_value = "g")]
        algebra: AlgebraArg,
        model: PathBuf,
    },
    /// Solve for equivariant extensions of H.
    Extend {
        #[arg(long)]
        degree: Option<u32>,
        #[arg(long, value_enum)]
        algebra: AlgebraArg,
        #[arg(long)]
        assert_orbit_nondegenerate: bool,
        model: PathBuf,
    },
    /// Derive the gauged sigma model action.
    Gauge {
        #[arg(long)]
        degree: Option<u32>,
        /// Print the action instead of the report.
        #[arg(long)]
        emit: Option<Format>,
        /// Write the emitted action here and print the report.
        #[arg(long, requires = "emit")]
        output: Option<PathBuf>,
        model: PathBuf,
    },
    /// Check `H + α_a ψ^a` over the declared actions.
    StandardExtend { model: PathBuf },
    /// Sample the model's defining identities at random rational points.
    Oracle {
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        model: PathBuf,
    },
}

/// What the process should print and return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn split(cmd: Cmd) -> (Command, PathBuf, Option<PathBuf>) {
    match cmd {
        Cmd::Check(CheckKind::Poisson { model }) => (Command::CheckPoisson, model, None),
        Cmd::Check(CheckKind::Dirac { model }) => (Command::CheckDirac, model, None),
        Cmd::Check(CheckKind::Gjac { model }) => (Command::CheckGjac, model, None),
        Cmd::Symmetries { degree, algebra, model } => (Command::Symmetries { degree, algebra: algebra.into() }, model, None),
        Cmd::Extend { degree, algebra, assert_orbit_nondegenerate, model } => (
            Command::Extend { degree, algebra: algebra.into(), assert_orbit_nondegenerate },
            model,
            None,
        ),
        Cmd::Gauge { degree, emit, output, model } => (Command::Gauge { degree, emit }, model, output),
        Cmd::StandardExtend { model } => (Command::StandardExtend, model, None),
        Cmd::Oracle { samples, seed, model } => (Command::Oracle { samples, seed }, model, None),
    }
}

/// Runs one invocation without touching the process state.
pub fn invoke<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Invocation { code, stdout: text, stderr: String::new() }
            } else {
                Invocation { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let (cmd, path, output) = split(cli.command);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            return Invocation { code: 2, stdout: String::new(), stderr: format!("{}: {e}\n", path.display()) }
        }
    };
    let spec = match parse(&text) {
        Ok(s) => s,
        Err(e) => return Invocation { code: 2, stdout: String::new(), stderr: format!("{}:{e}\n", path.display()) },
    };
    let out = run_timed(&cmd, &spec, cli.timing);
    let code = out.report.exit_code();
    let report = out.report.to_json() + "\n";
    match (out.emitted, output) {
        (Some(action), Some(file)) => match std::fs::write(&file, action + "\n") {
            Ok(()) => Invocation { code, stdout: report, stderr: String::new() },
            Err(e) => Invocation { code: 1, stdout: report, stderr: format!("{}: {e}\n", file.display()) },
        },
        (Some(action), None) => Invocation { code, stdout: action + "\n", stderr: String::new() },
        (None, _) => Invocation { code, stdout: report, stderr: String::new() },
    }
}
