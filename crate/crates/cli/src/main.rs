use clap::Parser;

fn main() {
    let cli = seqlab_cli::args::Cli::parse();
    match seqlab_cli::run(cli) {
        Ok(manifest) => {
            println!(
                "{}: wrote {} file(s) + manifest",
                manifest.command,
                manifest.files.len()
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
