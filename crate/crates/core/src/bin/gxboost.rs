fn main() {
    std::process::exit(gxboost::cli::run(std::env::args_os()));
}
