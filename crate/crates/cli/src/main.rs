use clap::error::ErrorKind;
use clap::Parser;
use hybrid_cli::config::{Args, Settings};
use hybrid_cli::error::{CliError, CliResult};

fn run() -> CliResult<()> {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(CliError::config(msg.lines().next().unwrap_or_default().trim_start_matches("error: ")));
        }
    };
    hybrid_cli::execute(&Settings::resolve(args)?)
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{}", e.record());
        std::process::exit(e.exit_code());
    }
}
