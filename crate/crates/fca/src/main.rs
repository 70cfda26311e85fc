fn main() {
    std::process::exit(fca::cli::run(std::env::args_os()));
}
