fn main() {
    std::process::exit(backscatter::cli::main_with_args(std::env::args_os()));
}
