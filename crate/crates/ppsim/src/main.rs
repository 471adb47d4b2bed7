fn main() {
    std::process::exit(ppsim::cli::cli_main(std::env::args()));
}
