fn main() -> std::process::ExitCode {
    cubic_moments::cli::main()
}
