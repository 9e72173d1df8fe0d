fn main() {
    std::process::exit(dssh_cli::run(std::env::args_os()));
}
