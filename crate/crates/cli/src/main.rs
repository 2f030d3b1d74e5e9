fn main() {
    std::process::exit(trapnoise_cli::main_with_args(std::env::args_os()));
}
