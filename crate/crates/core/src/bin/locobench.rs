fn main() {
    std::process::exit(locobench::cli::main_with_args(std::env::args_os()));
}
