use chromaharmony_service::{app, ServiceConfig};
use std::net::SocketAddr;
use std::time::Duration;

#[tokio::main]
async fn main() {
    if let Err(e) = serve().await {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

async fn serve() -> Result<(), String> {
    let config = ServiceConfig::from_env()?;
    let host = std::env::var("CHROMAHARMONY_HOST").unwrap_or_else(|_| "127.0.0.1".into());
    let port: u16 = match std::env::var("CHROMAHARMONY_PORT") {
        Ok(v) => v
            .parse()
            .map_err(|_| format!("CHROMAHARMONY_PORT={v:?} is not a port"))?,
        Err(_) => 8080,
    };
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| format!("bad listen address {host}:{port}: {e}"))?;

    let (router, state) = app(&config)?;
    let sweep_every = config.ttl.clamp(Duration::from_secs(1), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(sweep_every);
        loop {
            tick.tick().await;
            state.prune_expired().await;
        }
    });

    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| format!("cannot bind {addr}: {e}"))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, router)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| e.to_string())
}
