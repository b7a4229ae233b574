fn main() {
    std::process::exit(beta_targets::cli::main_entry());
}
