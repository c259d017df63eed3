fn main() {
    std::process::exit(whr::cli::run(std::env::args_os()));
}
