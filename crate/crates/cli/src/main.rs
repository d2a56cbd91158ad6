use clap::Parser;

fn main() {
    let cli = codegrade_cli::Cli::parse();
    let code = codegrade_cli::run(cli, &mut std::io::stdout().lock());
    std::process::exit(code);
}
