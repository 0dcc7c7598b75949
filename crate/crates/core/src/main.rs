fn main() {
    std::process::exit(rgg_spectra::cli::run(std::env::args_os()));
}
