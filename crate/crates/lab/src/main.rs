fn main() {
    std::process::exit(cylab::run_from(std::env::args_os()));
}
