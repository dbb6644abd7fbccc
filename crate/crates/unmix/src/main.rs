fn main() {
    std::process::exit(unmix::cli::run());
}
