fn main() {
    std::process::exit(bpderiv::harness::cli_main(std::env::args_os()));
}
