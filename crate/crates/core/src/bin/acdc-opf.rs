fn main() {
    std::process::exit(acdc_opf::io::run_cli(std::env::args_os()));
}
