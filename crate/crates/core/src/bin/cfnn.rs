fn main() {
    std::process::exit(cfnn::cli::cli_main(std::env::args_os()));
}
