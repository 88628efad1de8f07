fn main() {
    std::process::exit(obsent_cli::run(std::env::args_os()));
}
