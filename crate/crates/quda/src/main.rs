fn main() {
    std::process::exit(quda::cli::run());
}
