fn main() {
    std::process::exit(bia_harness::cli::main_with_args(std::env::args_os()));
}
