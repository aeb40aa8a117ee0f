fn main() {
    std::process::exit(secrecy_region::cli::run());
}
