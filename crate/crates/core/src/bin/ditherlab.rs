fn main() {
    std::process::exit(ditherlab::cli::run(std::env::args_os()));
}
