fn main() {
    std::process::exit(rfss_cli::main_with_args(std::env::args_os()));
}
