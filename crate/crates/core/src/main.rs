fn main() {
    std::process::exit(plaquette_sim::cli::run(std::env::args_os()));
}
