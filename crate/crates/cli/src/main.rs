use clap::Parser;

fn main() {
    let cli = minimax_meta_cli::Cli::parse();
    std::process::exit(minimax_meta_cli::execute(cli));
}
