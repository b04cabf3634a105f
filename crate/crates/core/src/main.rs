fn main() {
    let code = ris_lab::cli::run(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
