fn main() {
    std::process::exit(lja::cli::run(std::env::args_os()));
}
