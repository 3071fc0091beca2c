use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(slcrit::cli::run(std::env::args()) as u8)
}
