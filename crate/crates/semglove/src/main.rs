fn main() {
    std::process::exit(semglove::cli::run(std::env::args_os()));
}
