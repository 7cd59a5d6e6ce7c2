use std::process::ExitCode;

fn main() -> ExitCode {
    oscl_sim::run(std::env::args_os())
}
