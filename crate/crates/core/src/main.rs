fn main() {
    std::process::exit(rodpade::cli::run(std::env::args_os()));
}
