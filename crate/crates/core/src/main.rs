fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(dyntopic::cli::run(std::env::args_os()))
}
