fn main() {
    std::process::exit(psq_cli::run(std::env::args_os()));
}
