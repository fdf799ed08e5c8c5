fn main() {
    std::process::exit(crypto_stackelberg_cli::run_cli(std::env::args_os()));
}
