fn main() {
    if let Err(e) = bicav::cli::run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
