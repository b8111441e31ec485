fn main() {
    std::process::exit(noesc::cli::main_with_args(std::env::args_os()));
}
