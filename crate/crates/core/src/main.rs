fn main() {
    std::process::exit(symgrowth::cli::main_with_args(std::env::args_os()));
}
