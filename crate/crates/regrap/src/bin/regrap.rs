fn main() {
    std::process::exit(regrap::cli::dispatch(std::env::args().collect()));
}
