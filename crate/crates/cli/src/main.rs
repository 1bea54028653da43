fn main() {
    std::process::exit(fnlh_cli::main_with(std::env::args_os()));
}
