fn main() {
    std::process::exit(pfreq::cli::dispatch(std::env::args_os()));
}
