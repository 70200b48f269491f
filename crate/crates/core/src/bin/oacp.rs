fn main() -> std::process::ExitCode {
    oacp::cli::main()
}
