fn main() {
    std::process::exit(rotcocycle::cli::run(std::env::args_os()));
}
