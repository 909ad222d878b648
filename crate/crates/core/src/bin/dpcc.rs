fn main() {
    std::process::exit(dpcc::cli::main_with_args(std::env::args_os()));
}
