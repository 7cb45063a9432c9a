fn main() {
    std::process::exit(lrdfield::cli::main_entry());
}
