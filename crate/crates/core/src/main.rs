fn main() {
    std::process::exit(sumrate::cli::run(std::env::args_os()));
}
