use std::fs::File;
use std::io::{self, BufWriter};

use anyhow::Context;
use clap::Parser;

use routeplanner::bench::write_csv;
use routeplanner_cli::{run, Args};

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let rows = run(&args)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, BufWriter::new(file))?;
            log::info!("{} rows written to {}", rows.len(), path.display());
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}
