use clap::Parser;
use conewave_cli::{configure_threads, execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|_| execute(&cli).map(|_| ())) {
        eprintln!("conewave: {e}");
        std::process::exit(e.exit_code());
    }
}
