fn main() {
    std::process::exit(spectral_mce_cli::run_cli(std::env::args_os()));
}
