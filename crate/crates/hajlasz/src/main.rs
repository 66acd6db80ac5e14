fn main() -> std::process::ExitCode {
    hajlasz::cli::main()
}
