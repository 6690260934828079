fn main() {
    std::process::exit(rauzy_lab::cli::run(std::env::args_os()));
}
