fn main() -> std::process::ExitCode {
    ggc_core::cli::main()
}
