fn main() {
    let code = crickpred::cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
