fn main() {
    std::process::exit(mawc::cli::run(std::env::args_os()));
}
