use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use freelo::cli::{run, Command};

/// Exact finite-scale experiments with left-orderings of free products.
///
/// Exit status: 0 when every checked property held, 1 when one failed, 2 for bad input,
/// 3 when a search cap was hit.
#[derive(Parser)]
#[command(name = "freelo", version)]
struct Args {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Single-line JSON.
    #[arg(long, global = true)]
    compact: bool,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let out = match run(&args.command) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("freelo {}: {e}", args.command.name());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text =
        if args.compact { serde_json::to_string(&out.report) } else { serde_json::to_string_pretty(&out.report) }
            .expect("reports serialize");
    let written = match &args.output {
        Some(p) => std::fs::write(p, text + "\n"),
        None => writeln!(std::io::stdout().lock(), "{text}"),
    };
    if let Err(e) = written {
        eprintln!("freelo: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
