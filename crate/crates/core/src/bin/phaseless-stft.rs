fn main() {
    let code = phaseless_stft::cli::run(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
