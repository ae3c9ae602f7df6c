fn main() {
    std::process::exit(moduli_census::run(std::env::args_os()));
}
