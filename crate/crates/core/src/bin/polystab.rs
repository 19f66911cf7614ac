fn main() {
    std::process::exit(polystab::cli::main_with_args(std::env::args_os()));
}
