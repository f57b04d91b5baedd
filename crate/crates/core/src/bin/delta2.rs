fn main() {
    std::process::exit(delta2_capacity::cli::run(std::env::args_os()));
}
