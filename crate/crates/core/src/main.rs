fn main() {
    std::process::exit(matrec::cli::run(std::env::args_os()));
}
