fn main() {
    std::process::exit(frameforge_cli::run(std::env::args_os()));
}
