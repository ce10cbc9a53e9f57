fn main() {
    std::process::exit(mrrsched::cli::main_with(std::env::args_os()));
}
