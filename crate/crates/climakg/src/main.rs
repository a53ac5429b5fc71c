fn main() {
    env_logger::init();
    std::process::exit(climakg::cli::run());
}
