fn main() {
    std::process::exit(reviewcf::cli::main());
}
