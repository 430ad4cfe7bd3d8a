use clap::Parser;

fn main() {
    let cli = loopcont::cli::Cli::parse();
    std::process::exit(loopcont::cli::main_with(cli));
}
