fn main() {
    std::process::exit(sibf::cli::run(std::env::args_os()));
}
