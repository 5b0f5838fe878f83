fn main() {
    std::process::exit(energy_compose::cli::run(std::env::args_os()));
}
