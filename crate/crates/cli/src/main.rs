use clap::Parser;

fn main() {
    let cli = dwlab_cli::Cli::parse();
    if let Err(err) = dwlab_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
