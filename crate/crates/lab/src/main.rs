use std::process::ExitCode;

use pinning_lab::cli_io::{parse_config, run, summary_lines, write_outputs, CliError};

fn main() -> ExitCode {
    match execute() {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Display(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("pinlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute() -> Result<i32, CliError> {
    let cfg = parse_config(std::env::args_os())?;
    let output = run(&cfg)?;
    if let Some(csv) = write_outputs(&cfg, &output)? {
        print!("{csv}");
    }
    // summaries go to stderr so that stdout stays a clean CSV
    for line in summary_lines(&output.assertions) {
        eprintln!("{line}");
    }
    Ok(output.exit_code())
}
