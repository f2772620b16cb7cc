fn main() {
    std::process::exit(nvsim::cli::cli_dispatch(std::env::args_os()));
}
