fn main() {
    std::process::exit(saferad::cli::main_with_args(std::env::args_os()));
}
