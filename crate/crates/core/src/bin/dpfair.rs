fn main() {
    std::process::exit(dpfair::cli_io::main_with_args(std::env::args_os()));
}
