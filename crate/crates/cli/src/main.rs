fn main() {
    std::process::exit(symavg_cli::run(std::env::args_os()));
}
