fn main() {
    std::process::exit(hyperflow::cli::main_exit_code());
}
