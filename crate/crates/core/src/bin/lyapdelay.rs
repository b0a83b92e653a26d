use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lyapdelay::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(output) => {
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            let to_stdout = match &cli.command {
                lyapdelay::cli::Command::Solve(c) | lyapdelay::cli::Command::Les(c) => c.out.is_none(),
                lyapdelay::cli::Command::Sweep { common, .. } | lyapdelay::cli::Command::Convergence { common, .. } => {
                    common.out.is_none()
                }
            };
            if to_stdout {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(output.csv.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
