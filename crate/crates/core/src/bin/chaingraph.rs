fn main() {
    std::process::exit(chaingraph::cli::run(std::env::args_os()));
}
