fn main() {
    std::process::exit(partrx::cli::main_with_args(std::env::args_os()));
}
