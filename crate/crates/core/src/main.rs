fn main() {
    std::process::exit(wsp_core::cli::run(std::env::args_os()));
}
