use std::io::Write;

fn main() {
    let (out, result) = coop_regen::cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(out.as_bytes());
    if let Err(e) = result {
        eprintln!("crgc: {e}");
        std::process::exit(e.exit_code());
    }
}
