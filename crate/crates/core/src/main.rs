fn main() -> std::process::ExitCode {
    tunnelcascade::cli::main()
}
