fn main() {
    std::process::exit(opgraph_cli::run(std::env::args_os()));
}
