use clap::Parser;

fn main() {
    let cli = zsb::cli::Cli::parse();
    match zsb::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
