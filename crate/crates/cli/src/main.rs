use clap::Parser;

use saddlepoint_cli::{configure_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|_| run(cli)) {
        eprintln!("saddle: {e}");
        std::process::exit(e.exit_code());
    }
}
