fn main() {
    std::process::exit(levyfit_cli::run(std::env::args_os()));
}
