use clap::Parser;

fn main() {
    std::process::exit(padic_lab::cli::main_with(padic_lab::cli::Cli::parse()));
}
