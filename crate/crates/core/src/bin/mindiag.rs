fn main() {
    std::process::exit(mindiag::cli::run(std::env::args_os()));
}
