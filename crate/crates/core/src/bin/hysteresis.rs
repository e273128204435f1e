fn main() {
    std::process::exit(hysteresis_core::cli::run());
}
