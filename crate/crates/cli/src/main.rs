use clap::Parser;

fn main() {
    std::process::exit(nlheat_cli::run(nlheat_cli::Cli::parse()));
}
