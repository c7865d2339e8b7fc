fn main() {
    std::process::exit(redist::cli::main_entry());
}
