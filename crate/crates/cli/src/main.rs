use std::io::Write;
use std::process::ExitCode;

use nlmeas_cli::{execute, parse_args, RunError, Status};

fn run() -> Result<Status, RunError> {
    let config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let doc = execute(&config)?;
    let text = doc.render(config.format)?;
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    if doc.status == Status::ImpossiblePostselection {
        eprintln!("postselection can never succeed for this input");
    }
    Ok(doc.status)
}

fn main() -> ExitCode {
    match run() {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
