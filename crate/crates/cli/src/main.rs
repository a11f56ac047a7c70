fn main() {
    std::process::exit(qqsys_cli::run(std::env::args_os()));
}
