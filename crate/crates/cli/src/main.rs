use std::process::ExitCode;

fn main() -> ExitCode {
    let code = twinbeam_cli::args::run(std::env::args_os());
    ExitCode::from(code as u8)
}
