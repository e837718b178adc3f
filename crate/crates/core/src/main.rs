use std::process::ExitCode;

fn main() -> ExitCode {
    thermocomp::cli::main_with_args(std::env::args_os())
}
