fn main() {
    std::process::exit(aad_cli::run(std::env::args_os()));
}
