fn main() {
    std::process::exit(imprepair_cli::run_cli(std::env::args()));
}
