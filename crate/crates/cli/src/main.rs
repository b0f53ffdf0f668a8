fn main() {
    std::process::exit(eastlab_cli::run(std::env::args_os().skip(1)));
}
