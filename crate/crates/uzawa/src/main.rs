fn main() {
    std::process::exit(uzawa::cli::run());
}
