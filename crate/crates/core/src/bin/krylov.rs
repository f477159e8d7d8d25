fn main() {
    std::process::exit(krylov_core::cli::main_entry());
}
