fn main() {
    std::process::exit(divgraph::cli::run(std::env::args_os()));
}
