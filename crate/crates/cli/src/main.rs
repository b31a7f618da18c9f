fn main() -> std::process::ExitCode {
    xyent_cli::run(std::env::args_os())
}
