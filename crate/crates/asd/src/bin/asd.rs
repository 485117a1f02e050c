use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(asd::cli::parse_and_dispatch(std::env::args()) as u8)
}
