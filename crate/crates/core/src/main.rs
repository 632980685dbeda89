fn main() {
    std::process::exit(stirred_ring::cli::run(std::env::args()));
}
