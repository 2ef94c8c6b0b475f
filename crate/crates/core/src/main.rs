fn main() {
    std::process::exit(qmoment::cli::main_with(std::env::args_os()));
}
