fn main() {
    std::process::exit(splitshower::cli::run_from(std::env::args_os()));
}
