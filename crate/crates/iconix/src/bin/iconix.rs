//! Batch runner: one concept in, a directory of pipeline outputs out.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use iconix::batch::{run_batch, BatchSpec};
use iconix::env::BackendConfig;
use iconix::stages::parse_variants;

#[derive(Parser, Debug)]
#[command(name = "iconix", version, about = "Turn one concept into a dual-axis icon grid")]
struct Args {
    /// Input concept, e.g. "hope" or "fast food".
    #[arg(long)]
    concept: String,
    /// Output directory (created if missing).
    #[arg(long, default_value = "iconix-out")]
    out: PathBuf,
    /// Run every backend offline, ignoring ICONIX_* endpoints.
    #[arg(long)]
    mock: bool,
    /// Grid columns (complexity levels), 1 to 9.
    #[arg(long)]
    columns: Option<usize>,
    /// Comma-separated style variants.
    #[arg(long, default_value = "outline,filled,color")]
    styles: String,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file of pipeline config overrides.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let styles = match parse_variants(&args.styles) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let backend_config = if args.mock {
        BackendConfig::default()
    } else {
        match BackendConfig::from_env() {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    };
    let spec = BatchSpec {
        concept: args.concept,
        out_dir: args.out,
        mock: args.mock,
        columns: args.columns,
        styles,
        seed: args.seed,
        config_file: args.config,
    };
    match run_batch(&spec, &backend_config) {
        Ok(manifest) => {
            println!(
                "{}: {}x{} grid, variants {:?} -> {}",
                manifest.concept,
                manifest.rows,
                manifest.columns,
                manifest.variants,
                spec.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
