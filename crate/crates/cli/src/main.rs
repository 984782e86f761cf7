fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(fabtest_cli::cli_main(&argv));
}
