use clap::Parser;
use impulse_attain_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("attain: {e}");
        std::process::exit(e.exit_code());
    }
}
