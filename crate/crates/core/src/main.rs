fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(extcat::cli::main_with(&args));
}
