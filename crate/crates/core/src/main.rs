fn main() {
    std::process::exit(betalike::cli::main());
}
