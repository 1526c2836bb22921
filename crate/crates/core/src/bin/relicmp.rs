fn main() -> std::process::ExitCode {
    relicmp::cli::main_entry()
}
