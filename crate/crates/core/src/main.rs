fn main() {
    std::process::exit(gapcheck::cli::run(std::env::args_os()));
}
