fn main() {
    std::process::exit(qfsp::cli::main_with_args(std::env::args_os()));
}
