use clap::Parser;

fn main() {
    let cli = stabkit_cli::Cli::parse();
    std::process::exit(stabkit_cli::run(&cli));
}
