fn main() {
    std::process::exit(rdhei::cli::run(std::env::args_os()));
}
