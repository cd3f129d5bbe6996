fn main() {
    std::process::exit(mmofdm_cli::run(std::env::args_os()));
}
