fn main() {
    std::process::exit(equidiv::cli::main_with_args(std::env::args_os()));
}
