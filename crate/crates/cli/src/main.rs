use std::process::ExitCode;

fn main() -> ExitCode {
    dmspec_cli::main_with(std::env::args_os())
}
