fn main() { std::process::exit(meshsteg::cli::run()) }
