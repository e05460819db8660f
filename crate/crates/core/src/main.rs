fn main() {
    std::process::exit(ggfit::cli::main());
}
