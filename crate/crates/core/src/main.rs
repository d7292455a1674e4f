fn main() {
    std::process::exit(media_egt::cli::run(std::env::args_os()));
}
