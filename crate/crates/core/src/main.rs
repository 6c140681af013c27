fn main() {
    std::process::exit(shuffle_glr::cli::main());
}
