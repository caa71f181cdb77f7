fn main() {
    std::process::exit(glocal::cli::run(std::env::args_os()));
}
