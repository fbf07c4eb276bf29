use std::process::ExitCode;

fn main() -> ExitCode {
    mu_service::cli::main()
}
