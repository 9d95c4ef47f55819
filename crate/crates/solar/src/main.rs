fn main() {
    std::process::exit(solar::cli::run(std::env::args_os()));
}
