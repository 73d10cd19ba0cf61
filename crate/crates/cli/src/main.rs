fn main() {
    std::process::exit(qpulse_cli::run(std::env::args_os()));
}
