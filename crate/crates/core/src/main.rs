fn main() {
    std::process::exit(dihom::cli::main_with_args(std::env::args_os()));
}
