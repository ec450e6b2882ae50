fn main() {
    std::process::exit(tripod::cli::run(std::env::args_os()));
}
