fn main() {
    std::process::exit(ergodrift::cli::run());
}
