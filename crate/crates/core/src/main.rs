fn main() {
    std::process::exit(hsiband::cli::run(std::env::args_os()));
}
