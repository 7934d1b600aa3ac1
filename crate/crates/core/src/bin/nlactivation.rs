fn main() {
    std::process::exit(nlactivation::harness::cli::main_exit_code());
}
