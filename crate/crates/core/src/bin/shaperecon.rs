use clap::Parser;

fn main() {
    let cli = shaperecon::cli::Cli::parse();
    std::process::exit(shaperecon::cli::execute(cli));
}
