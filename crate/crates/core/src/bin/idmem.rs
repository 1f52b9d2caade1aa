fn main() {
    std::process::exit(idmem::cli::run(std::env::args_os()));
}
