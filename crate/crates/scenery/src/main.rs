use std::process::ExitCode;

fn main() -> ExitCode {
    scenery::cli::run()
}
