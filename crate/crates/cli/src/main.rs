fn main() {
    std::process::exit(anytime_cli::run(std::env::args_os()));
}
