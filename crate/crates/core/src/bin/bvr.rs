fn main() {
    std::process::exit(bvr_tactics::cli::run(std::env::args_os()));
}
