use std::path::PathBuf;

use anyhow::Context;
use larex_service::{router, AppState, Library};
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();

    let root = PathBuf::from(std::env::var("LAREX_BOOKS_DIR").context("LAREX_BOOKS_DIR is not set")?);
    anyhow::ensure!(root.is_dir(), "LAREX_BOOKS_DIR {} is not a directory", root.display());
    let addr = std::env::var("LAREX_ADDR").unwrap_or_else(|_| "127.0.0.1:8080".to_string());
    let workers = match std::env::var("LAREX_LINE_WORKERS") {
        Ok(v) => v.parse().context("LAREX_LINE_WORKERS must be a positive integer")?,
        Err(_) => std::thread::available_parallelism().map_or(2, |n| n.get()),
    };

    let app = router(AppState::new(Library::new(&root), workers));
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .with_context(|| format!("cannot bind {addr}"))?;
    tracing::info!("serving {} on {addr}", root.display());
    axum::serve(listener, app).await?;
    Ok(())
}
