fn main() {
    std::process::exit(qla::run(std::env::args_os()));
}
