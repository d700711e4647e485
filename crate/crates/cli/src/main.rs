use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use clap::{Parser, ValueEnum};
use qsde_core::frontend::{
    parse_nbar, parse_params, render, run_source, Command, Diagnostic, DiagnosticKind, Format,
    ParamAssignment, Report, RunFlags, Span,
};
use qsde_core::system::{NbarMode, ThetaBarConvention};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Check,
    Extract,
    Synthesize,
    Explain,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Check => Command::Check,
            CommandArg::Extract => Command::Extract,
            CommandArg::Synthesize => Command::Synthesize,
            CommandArg::Explain => Command::Explain,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ThetaBarArg {
    Physical,
    Conjugate,
}

/// Check, explain and synthesize nonlinear quantum stochastic systems.
#[derive(Debug, Parser)]
#[command(name = "qsde", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,

    /// `.qs` description files; several files are processed concurrently.
    #[arg(required = true)]
    files: Vec<PathBuf>,

    /// n̄ used by the Hamiltonian formula: `literal`, `graded` or an integer.
    #[arg(long, value_parser = parse_nbar)]
    nbar: Option<NbarMode>,

    /// Doubled commutation matrix convention.
    #[arg(long, value_enum)]
    theta_bar: Option<ThetaBarArg>,

    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,

    /// Cross-check against truncated Fock matrices with this per-mode cutoff.
    #[arg(long, value_name = "CUTOFF")]
    oracle_check: Option<u32>,

    /// Parameter values for the oracle, e.g. `b1=1.5,b2=0.5,chi=0.1`.
    #[arg(long, value_parser = parse_params, default_value = "")]
    params: ParamAssignment,
}

fn process(command: Command, path: &PathBuf, flags: &RunFlags) -> Report {
    match std::fs::read_to_string(path) {
        Ok(src) => {
            let mut r = run_source(command, &src, flags);
            if r.system_name == "unnamed" {
                r.system_name = path.display().to_string();
            }
            r
        }
        Err(e) => Report::failure(
            &command.to_string(),
            &path.display().to_string(),
            Diagnostic::new(DiagnosticKind::Semantic, Span::new(0, 0), format!("cannot read file: {e}")),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = Command::from(cli.command);
    let flags = RunFlags {
        nbar: cli.nbar,
        theta_bar: cli.theta_bar.map(|t| match t {
            ThetaBarArg::Physical => ThetaBarConvention::Physical,
            ThetaBarArg::Conjugate => ThetaBarConvention::Conjugate,
        }),
        oracle_cutoff: cli.oracle_check,
        params: cli.params,
    };
    let format = match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Structured => Format::Structured,
    };

    let reports: Vec<Report> = thread::scope(|s| {
        let handles: Vec<_> = cli
            .files
            .iter()
            .map(|p| s.spawn(|| process(command, p, &flags)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    match format {
        Format::Structured if reports.len() > 1 => {
            let docs: Vec<String> = reports.iter().map(Report::to_structured).collect();
            println!("[\n{}\n]", docs.join(",\n"));
        }
        _ => {
            for r in &reports {
                print!("{}", render(r, format));
            }
        }
    }
    let code = reports.iter().map(|r| r.exit_code).max().unwrap_or(0);
    ExitCode::from(code.clamp(0, 255) as u8)
}
