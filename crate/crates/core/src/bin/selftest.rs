fn main() {
    std::process::exit(selftest_core::cli::main_with_args(std::env::args_os()));
}
