use clap::Parser;

fn main() {
    let cli = tubeint_cli::Cli::parse();
    if let Err(e) = tubeint_cli::run(cli) {
        eprintln!("tubeint: {e}");
        std::process::exit(e.exit_code());
    }
}
