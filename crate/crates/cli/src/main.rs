fn main() {
    std::process::exit(threadtox_cli::run(std::env::args_os()));
}
