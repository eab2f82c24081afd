fn main() {
    std::process::exit(cle_lab::cli::main_entry());
}
