fn main() {
    std::process::exit(pcs_imdd::cli::run(std::env::args_os()));
}
