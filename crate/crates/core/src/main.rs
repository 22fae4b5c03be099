fn main() -> std::process::ExitCode {
    toda_lab::cli::main()
}
