//! Session API server, or (with `--models`) a model server for the mock
//! backends.

use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use iconix::env::BackendConfig;
use iconix::session::SessionManager;

#[derive(Parser, Debug)]
#[command(name = "iconix-serve", version, about = "Serve the iconix session API")]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
    /// Directory holding one subdirectory per session.
    #[arg(long, default_value = "iconix-sessions")]
    root: PathBuf,
    /// Use offline backends regardless of ICONIX_* variables.
    #[arg(long)]
    mock: bool,
    /// Serve the backend protocol (`/v1/{kind}`) instead of sessions.
    #[arg(long)]
    models: bool,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let config = if args.mock {
        BackendConfig::default()
    } else {
        BackendConfig::from_env()?
    };
    let app = if args.models {
        iconix::model_server::router(Arc::new(config.build()))
    } else {
        iconix::server::router(Arc::new(SessionManager::new(&args.root, &config)))
    };
    let listener = tokio::net::TcpListener::bind(&args.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
