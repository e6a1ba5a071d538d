use clap::Parser;
use wavesim::cli::{run, threads_from_env, Cli};

fn main() {
    if let Some(n) = threads_from_env() {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            if !text.is_empty() {
                println!("{}", text.trim_end());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
