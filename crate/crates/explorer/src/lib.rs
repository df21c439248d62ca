//! HTTP service over two operating points that share one design space.
//!
//! Endpoints:
//!
//! * `GET /health`
//! * `GET /session`: names, dimension and per-point reduced-coordinate bounds
//! * `GET /contours?point=name&resolution=R`: surface values on an `R×R` grid
//! * `POST /project` `{point, designs}`: reduced coordinates and predictions
//! * `POST /generate` `{point, y, count, seed}`: designs at one point,
//!   cross-projected onto the other
//!
//! Every body is a JSON object with a `version` field. The session is
//! immutable, so identical requests get identical bodies.

pub mod api;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;

use ridgekit_core::io::{read_operating_point, OperatingPoint};
use ridgekit_core::{Error, Result};

/// Two operating points over the same `d` inputs, each with a 2-D surface.
#[derive(Debug, Clone)]
pub struct Session {
    points: [OperatingPoint; 2],
}

impl Session {
    pub fn new(a: OperatingPoint, b: OperatingPoint) -> Result<Self> {
        for p in [&a, &b] {
            if p.subspace.dim() != 2 || p.surface.dim() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "operating point {:?} has a {}-dimensional subspace; two are required",
                    p.name,
                    p.subspace.dim()
                )));
            }
        }
        if a.subspace.ambient_dim() != b.subspace.ambient_dim() {
            return Err(Error::InvalidArgument(format!(
                "operating points disagree on the design dimension: {:?} has d = {}, {:?} has d = {}",
                a.name,
                a.subspace.ambient_dim(),
                b.name,
                b.subspace.ambient_dim()
            )));
        }
        if a.name == b.name {
            return Err(Error::InvalidArgument(format!("both operating points are named {:?}", a.name)));
        }
        Ok(Self { points: [a, b] })
    }

    pub fn load(first: impl AsRef<Path>, second: impl AsRef<Path>) -> Result<Self> {
        let read = |p: &Path| read_operating_point(p).map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())));
        Self::new(read(first.as_ref())?, read(second.as_ref())?)
    }

    pub fn dim(&self) -> usize {
        self.points[0].subspace.ambient_dim()
    }

    pub fn points(&self) -> &[OperatingPoint; 2] {
        &self.points
    }

    pub fn point(&self, name: &str) -> Option<(usize, &OperatingPoint)> {
        self.points.iter().enumerate().find(|(_, p)| p.name == name)
    }

    pub fn other(&self, index: usize) -> &OperatingPoint {
        &self.points[1 - index]
    }
}

impl IntoResponse for api::Reply {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, [(header::CONTENT_TYPE, "application/json")], self.body).into_response()
    }
}

type Shared = State<Arc<Session>>;

async fn health() -> api::Reply {
    api::health()
}

async fn session_info(State(s): Shared) -> api::Reply {
    api::session(&s)
}

async fn contours(State(s): Shared, Query(q): Query<HashMap<String, String>>) -> api::Reply {
    api::contours(&s, &q)
}

async fn project(State(s): Shared, body: String) -> api::Reply {
    tokio::task::spawn_blocking(move || api::project(&s, &body))
        .await
        .unwrap_or_else(|e| api::error(500, "internal", &e.to_string()))
}

async fn generate(State(s): Shared, body: String) -> api::Reply {
    tokio::task::spawn_blocking(move || api::generate(&s, &body))
        .await
        .unwrap_or_else(|e| api::error(500, "internal", &e.to_string()))
}

pub fn router(session: Arc<Session>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/session", get(session_info))
        .route("/contours", get(contours))
        .route("/project", post(project))
        .route("/generate", post(generate))
        .with_state(session)
}

/// Serves `session` on an already bound listener until the task is dropped.
pub async fn serve_on(listener: tokio::net::TcpListener, session: Arc<Session>) -> std::io::Result<()> {
    axum::serve(listener, router(session)).await
}

/// Binds `addr`, reports the bound address through `on_ready`, then serves forever.
pub fn serve_blocking(session: Session, addr: SocketAddr, on_ready: impl FnOnce(SocketAddr)) -> Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::Io(format!("bind {addr}: {e}")))?;
        let local = listener.local_addr()?;
        on_ready(local);
        serve_on(listener, Arc::new(session)).await.map_err(Error::from)
    })
}
