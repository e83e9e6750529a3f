fn main() {
    std::process::exit(froc_core::cli::main_with_args(std::env::args_os()));
}
