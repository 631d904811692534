use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(evdemand::cli::run() as u8)
}
