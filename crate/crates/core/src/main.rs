fn main() {
    std::process::exit(eventloc::cli::run(std::env::args_os()));
}
