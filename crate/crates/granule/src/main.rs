fn main() {
    std::process::exit(granule::cli::main_code(std::env::args_os()));
}
