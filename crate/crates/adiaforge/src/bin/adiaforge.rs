fn main() {
    std::process::exit(adiaforge::cli::run());
}
