//! Request handlers as plain functions from parsed input to a JSON reply.

use std::collections::HashMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use ridgekit_core::design::{crossproject, generate_designs, parallel_weights, project_designs, CrossProjection};
use ridgekit_core::io::{to_exact_json, FORMAT_VERSION};
use ridgekit_core::subspace::contour_grid;
use ridgekit_core::Error;

use crate::Session;

/// Largest design count served by one generate request.
pub const MAX_COUNT: usize = 64;
pub const MIN_RESOLUTION: usize = 2;
pub const MAX_RESOLUTION: usize = 512;

/// Status code plus JSON body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub body: String,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    version: u32,
    #[serde(flatten)]
    payload: &'a T,
}

fn ok<T: Serialize>(payload: &T) -> Reply {
    match to_exact_json(&Versioned { version: FORMAT_VERSION, payload }) {
        Ok(body) => Reply { status: 200, body },
        Err(e) => error(500, "serialization", &e.to_string()),
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    status: &'a str,
    code: &'a str,
    message: &'a str,
}

pub fn error(status: u16, code: &str, message: &str) -> Reply {
    let body = to_exact_json(&Versioned { version: FORMAT_VERSION, payload: &ErrorBody { status: "error", code, message } })
        .unwrap_or_else(|_| format!("{{\"version\": {FORMAT_VERSION}, \"status\": \"error\"}}\n"));
    Reply { status, body }
}

fn bad_request(message: &str) -> Reply {
    error(400, "bad_request", message)
}

fn unknown_point(name: &str) -> Reply {
    error(404, "unknown_point", &format!("no operating point named {name:?}"))
}

fn internal(e: &Error) -> Reply {
    error(500, "internal", &e.to_string())
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
}

pub fn health() -> Reply {
    ok(&Health { status: "ok" })
}

#[derive(Serialize)]
struct PointSummary<'a> {
    name: &'a str,
    objective: &'a str,
    n: usize,
    samples: usize,
    r_squared: f64,
    y_bounds: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct SessionBody<'a> {
    status: &'static str,
    d: usize,
    points: Vec<PointSummary<'a>>,
}

pub fn session(s: &Session) -> Reply {
    let points = s
        .points()
        .iter()
        .map(|p| PointSummary {
            name: &p.name,
            objective: &p.objective,
            n: p.subspace.dim(),
            samples: p.training_f.len(),
            r_squared: p.surface.r_squared,
            y_bounds: p.surface.y_bounds.iter().map(|&(lo, hi)| [lo, hi]).collect(),
        })
        .collect();
    ok(&SessionBody { status: "ok", d: s.dim(), points })
}

#[derive(Serialize)]
struct ContourBody<'a> {
    status: &'static str,
    point: &'a str,
    resolution: usize,
    points: Vec<[f64; 3]>,
}

/// `GET /contours?point=name&resolution=R`.
pub fn contours(s: &Session, query: &HashMap<String, String>) -> Reply {
    let Some(name) = query.get("point") else {
        return bad_request("missing query parameter point");
    };
    let Some(raw) = query.get("resolution") else {
        return bad_request("missing query parameter resolution");
    };
    let resolution = match raw.parse::<usize>() {
        Ok(r) if (MIN_RESOLUTION..=MAX_RESOLUTION).contains(&r) => r,
        _ => return bad_request(&format!("resolution must be an integer in {MIN_RESOLUTION}..={MAX_RESOLUTION}, got {raw:?}")),
    };
    let Some((_, p)) = s.point(name) else {
        return unknown_point(name);
    };
    match contour_grid(&p.surface, resolution) {
        Ok(points) => ok(&ContourBody { status: "ok", point: &p.name, resolution, points }),
        Err(e) => internal(&e),
    }
}

#[derive(Serialize)]
struct ProjectionBody {
    y: Vec<f64>,
    predicted: f64,
    extrapolated: bool,
}

impl From<CrossProjection<f64>> for ProjectionBody {
    fn from(c: CrossProjection<f64>) -> Self {
        Self { y: c.y, predicted: c.predicted, extrapolated: c.extrapolated }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectRequest {
    point: String,
    designs: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct ProjectBody<'a> {
    status: &'static str,
    point: &'a str,
    projections: Vec<ProjectionBody>,
}

fn parse_body<'a, T: Deserialize<'a>>(body: &'a str) -> Result<T, Reply> {
    serde_json::from_str(body).map_err(|e| bad_request(&format!("malformed request body: {e}")))
}

/// `POST /project` with `{point, designs}`.
pub fn project(s: &Session, body: &str) -> Reply {
    let req: ProjectRequest = match parse_body(body) {
        Ok(r) => r,
        Err(reply) => return reply,
    };
    let Some((_, p)) = s.point(&req.point) else {
        return unknown_point(&req.point);
    };
    if let Some(bad) = req.designs.iter().position(|x| x.len() != s.dim()) {
        return bad_request(&format!("design {bad} has {} entries, expected {}", req.designs[bad].len(), s.dim()));
    }
    let xs: Vec<DVector<f64>> = req.designs.iter().map(|x| DVector::from_column_slice(x)).collect();
    match project_designs(&xs, &p.surface, &p.subspace) {
        Ok(proj) => ok(&ProjectBody {
            status: "ok",
            point: &p.name,
            projections: proj.into_iter().map(ProjectionBody::from).collect(),
        }),
        Err(e) => internal(&e),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateRequest {
    point: String,
    y: Vec<f64>,
    count: usize,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct DesignBody {
    x: Vec<f64>,
    weights: Vec<f64>,
    strategy: &'static str,
    slack: f64,
}

#[derive(Serialize)]
struct GenerateBody<'a> {
    status: &'static str,
    point: &'a str,
    other: &'a str,
    infeasible: bool,
    y: Vec<f64>,
    seed: u64,
    short: bool,
    null_space_empty: bool,
    designs: Vec<DesignBody>,
    cross: Vec<ProjectionBody>,
}

#[derive(Serialize)]
struct Certificate {
    max_violation: f64,
    message: String,
}

#[derive(Serialize)]
struct InfeasibleBody<'a> {
    status: &'static str,
    point: &'a str,
    infeasible: bool,
    y: Vec<f64>,
    certificate: Certificate,
}

/// `POST /generate` with `{point, y, count, seed}`.
pub fn generate(s: &Session, body: &str) -> Reply {
    let req: GenerateRequest = match parse_body(body) {
        Ok(r) => r,
        Err(reply) => return reply,
    };
    let Some((idx, p)) = s.point(&req.point) else {
        return unknown_point(&req.point);
    };
    if req.count == 0 || req.count > MAX_COUNT {
        return bad_request(&format!("count must lie in 1..={MAX_COUNT}, got {}", req.count));
    }
    if req.y.len() != p.subspace.dim() {
        return bad_request(&format!("y has {} entries, expected {}", req.y.len(), p.subspace.dim()));
    }
    let batch = match generate_designs(&p.subspace, &req.y, req.count, req.seed) {
        Ok(b) => b,
        Err(Error::Infeasible { max_violation }) => {
            return ok(&InfeasibleBody {
                status: "ok",
                point: &p.name,
                infeasible: true,
                y: req.y.clone(),
                certificate: Certificate {
                    max_violation,
                    message: format!("every design with these coordinates leaves the unit box by at least {max_violation:.3e}"),
                },
            })
        }
        Err(e @ Error::InvalidArgument(_)) => return bad_request(&e.to_string()),
        Err(e) => return internal(&e),
    };
    let other = s.other(idx);
    let cross = match crossproject(&batch, &other.surface, &other.subspace) {
        Ok(c) => c,
        Err(e) => return internal(&e),
    };
    let lead = p.subspace.column(0);
    let designs = batch
        .designs
        .iter()
        .map(|d| DesignBody {
            x: d.x.iter().copied().collect(),
            weights: parallel_weights(&d.x, &lead).iter().copied().collect(),
            strategy: d.strategy.as_str(),
            slack: d.slack,
        })
        .collect();
    ok(&GenerateBody {
        status: "ok",
        point: &p.name,
        other: &other.name,
        infeasible: false,
        y: batch.y.clone(),
        seed: req.seed,
        short: batch.short,
        null_space_empty: batch.null_space_empty,
        designs,
        cross: cross.into_iter().map(ProjectionBody::from).collect(),
    })
}
