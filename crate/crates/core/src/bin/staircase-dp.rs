fn main() {
    std::process::exit(staircase_dp::cli::main_with_args(std::env::args_os()));
}
