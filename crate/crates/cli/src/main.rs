fn main() {
    std::process::exit(hofa_cli::run(std::env::args_os()));
}
