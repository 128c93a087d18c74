fn main() {
    std::process::exit(wfm::cli::main_with_args(std::env::args_os()));
}
