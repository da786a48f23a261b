fn main() {
    std::process::exit(ulnml::cli::run(std::env::args_os()));
}
