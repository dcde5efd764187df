use clap::Parser;

use josephson_cavity::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error: {}", err.message);
        std::process::exit(err.code);
    }
}
