fn main() {
    std::process::exit(polyinj::cli::dispatch(std::env::args_os()));
}
