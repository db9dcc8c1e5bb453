fn main() {
    std::process::exit(helmholo::cli::run());
}
