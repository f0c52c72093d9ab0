fn main() {
    std::process::exit(mayerwave::cli::main_with_args(std::env::args_os()));
}
