fn main() {
    std::process::exit(hkge::cli::run());
}
