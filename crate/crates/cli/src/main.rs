use std::io::Write;

fn main() {
    let (text, code) = invman_cli::main_with_args(std::env::args_os());
    let _ = std::io::stdout().write_all(text.as_bytes());
    std::process::exit(code);
}
