fn main() {
    std::process::exit(wgm_cli::run());
}
