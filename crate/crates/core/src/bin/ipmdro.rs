fn main() {
    std::process::exit(ipmdro::cli::main_with_args(std::env::args_os()));
}
