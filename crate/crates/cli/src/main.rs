use std::process::ExitCode;

use clap::Parser;
use qrsteg::{run, Cli, CliError, Exit};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("{}", CliError::Usage(e.kind().to_string()).machine_line());
            return ExitCode::from(Exit::Usage as u8);
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qrsteg: {e}");
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit() as u8)
        }
    }
}
