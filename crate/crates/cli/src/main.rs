fn main() {
    std::process::exit(chansel_cli::run(std::env::args_os()));
}
