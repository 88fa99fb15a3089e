fn main() {
    std::process::exit(nodal_zeta::cli::main_with_args(std::env::args_os()));
}
