fn main() {
    std::process::exit(oidkit_cli::run(std::env::args_os()));
}
