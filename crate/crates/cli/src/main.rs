fn main() {
    std::process::exit(holab::cli::run(std::env::args_os()));
}
