fn main() {
    std::process::exit(shrinkers::cli::main_with(std::env::args_os()));
}
