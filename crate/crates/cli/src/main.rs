fn main() {
    std::process::exit(cnt_coherence_cli::cli_main(std::env::args_os()));
}
