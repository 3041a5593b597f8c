fn main() {
    std::process::exit(pvqed::cli::main_with_args(std::env::args_os()));
}
