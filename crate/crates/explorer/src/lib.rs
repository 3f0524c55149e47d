//! Read-only HTTP API over k-Graph run artifacts.
//!
//! Routes:
//!
//! | path | payload |
//! |------|---------|
//! | `GET /api/runs` | [`api::RunSummary`] list |
//! | `GET /api/runs/{id}/graph?lambda=&gamma=` | [`api::GraphView`] |
//! | `GET /api/runs/{id}/node/{node_id}` | [`api::NodeDetail`] |
//! | `GET /api/runs/{id}/clusters` | [`api::ClustersView`] |
//! | `GET /api/runs/{id}/underhood` | [`api::UnderHood`] |
//!
//! Errors are `{"error": "..."}` with status 400 or 404.

pub mod api;
mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::http::Method;
use axum::routing::get;
use axum::Router;
use tower_http::cors::{Any, CorsLayer};

pub use store::ArtifactStore;

pub fn router(store: Arc<ArtifactStore>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET]);
    Router::new()
        .route("/api/runs", get(api::list_runs))
        .route("/api/runs/{id}/graph", get(api::graph))
        .route("/api/runs/{id}/node/{node_id}", get(api::node))
        .route("/api/runs/{id}/clusters", get(api::clusters))
        .route("/api/runs/{id}/underhood", get(api::underhood))
        .layer(cors)
        .with_state(store)
}

/// Serves `store` on `addr` until the process is stopped.
pub async fn serve(store: ArtifactStore, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(store))).await
}
