fn main() {
    std::process::exit(annotmtp::cli::run(std::env::args_os()));
}
