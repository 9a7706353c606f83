use std::process::ExitCode;

fn main() -> ExitCode {
    wspline::cli::main_with_args(std::env::args_os())
}
