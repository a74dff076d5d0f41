fn main() {
    std::process::exit(essspec::cli::main_with_args(std::env::args_os()));
}
