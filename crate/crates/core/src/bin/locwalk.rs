fn main() {
    std::process::exit(locwalk::cli::main_with_args(std::env::args_os()));
}
