fn main() {
    std::process::exit(lame_resolvent::cli::main_with_args(std::env::args_os()));
}
