mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use report::{render_text, RunReport};

const EXIT_USAGE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let start = Instant::now();
    let outcome = match commands::run(&cli.command, cli.seed, cli.tol) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let report = RunReport {
        command: cli.command.name().to_string(),
        inputs: outcome.inputs,
        results: outcome.results,
        seed: cli.seed,
        tolerances: outcome.tolerances,
        wall_time_ms: start.elapsed().as_millis() as u64,
    };

    let stdout = match &cli.json {
        Some(None) => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Some(Some(path)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
            render_text(&report, &outcome.lines)
        }
        None => render_text(&report, &outcome.lines),
    };
    // A closed pipe (`dso ... | head`) is not an error worth a panic.
    let _ = std::io::stdout().lock().write_all(stdout.as_bytes());

    if outcome.failed {
        ExitCode::from(EXIT_VIOLATION)
    } else {
        ExitCode::SUCCESS
    }
}
