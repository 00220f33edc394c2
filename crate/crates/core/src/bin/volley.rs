fn main() {
    std::process::exit(volley::cli::run(std::env::args_os()));
}
