fn main() -> std::process::ExitCode {
    yieldcast::cli::main_with_args(std::env::args_os())
}
