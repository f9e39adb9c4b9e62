use clap::Parser;

fn main() {
    let cli = lupus::cli::Cli::parse();
    std::process::exit(lupus::cli::main_with(cli));
}
