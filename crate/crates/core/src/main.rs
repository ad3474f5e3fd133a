use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = ssg::cli::Cli::parse();
    let stdout = std::io::stdout();
    match ssg::cli::run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
