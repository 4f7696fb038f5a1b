fn main() {
    std::process::exit(tailsmooth::cli::run(std::env::args_os()));
}
