use clap::error::ErrorKind;
use clap::Parser;
use focklab::{run, Cli};

fn main() {
    // FOCKLAB_THREADS caps internal parallelism
    if let Ok(v) = std::env::var("FOCKLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(0);
            }
            _ => {
                eprint!("{e}");
                std::process::exit(64);
            }
        },
    };
    std::process::exit(run(&cli));
}
