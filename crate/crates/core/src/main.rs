use clap::Parser;

use crit_core::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("crit: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
