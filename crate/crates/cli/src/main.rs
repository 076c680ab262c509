use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(twotime_cli::run(std::env::args_os()))
}
