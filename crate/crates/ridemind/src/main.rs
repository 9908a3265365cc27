fn main() {
    std::process::exit(ridemind::cli::run(std::env::args_os()));
}
