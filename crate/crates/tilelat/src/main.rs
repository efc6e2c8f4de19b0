fn main() {
    std::process::exit(tilelat::run(std::env::args_os()));
}
