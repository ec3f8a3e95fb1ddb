fn main() -> std::process::ExitCode {
    rfbm_lab::cli::main()
}
