fn main() {
    std::process::exit(spinpump::cli::run(std::env::args_os()));
}
