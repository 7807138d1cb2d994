//! HTTP service exposing tiles, point classification and loci.
//!
//! Every endpoint is a pure function of its query string: the only shared
//! state is the semaphore bounding simultaneous tile renders.

pub mod params;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use mcmullen_core::dynamics::{classify_parameter, phi_of_map, Outcome, SliceSpec};
use mcmullen_core::geometry::{centers, spine_polyline, SpineOrder};
use mcmullen_core::palette::Palette;
use mcmullen_core::render::{
    default_budget, encode_image, render_plane, ImageFormat, Overlay, PlaneKind, PlaneSpec, Viewport, DEFAULT_BUDGET,
};
use mcmullen_core::Complex64;
use serde_json::{json, Value};
use tokio::sync::Semaphore;
use tower_http::cors::{AllowOrigin, CorsLayer};

use params::{
    check_budget, check_degree, check_px, check_width, parse_complex, parse_real, parse_uint, plane_kind, ParamError,
    SliceArgs, SliceKind,
};

pub const DEFAULT_TILE_PX: usize = 256;
pub const DEFAULT_LOCI_SAMPLES: usize = 256;
pub const MAX_LOCI_SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Simultaneous tile renders allowed.
    pub max_concurrent_tiles: usize,
    /// Origin allowed by CORS; `None` allows any origin.
    pub ui_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        ServiceConfig {
            max_concurrent_tiles: 2 * cores,
            ui_origin: None,
        }
    }
}

#[derive(Clone)]
struct AppState {
    tiles: Arc<Semaphore>,
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    Unprocessable(String),
    Internal(String),
}

impl From<ParamError> for ApiError {
    fn from(e: ParamError) -> Self {
        match e {
            ParamError::Malformed(m) => ApiError::BadRequest(m),
            ParamError::OutOfRange(m) => ApiError::Unprocessable(m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, msg) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::Unprocessable(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(json!({ "error": msg }))).into_response()
    }
}

type Q = HashMap<String, String>;

fn field<'a>(q: &'a Q, name: &str) -> Option<&'a str> {
    q.get(name).map(String::as_str)
}

fn need<'a>(q: &'a Q, name: &str) -> Result<&'a str, ParamError> {
    field(q, name).ok_or_else(|| ParamError::Malformed(format!("missing parameter {name}")))
}

fn opt_complex(q: &Q, name: &str) -> Result<Option<Complex64>, ParamError> {
    field(q, name).map(parse_complex).transpose()
}

fn slice_from_query(q: &Q) -> Result<(SliceKind, PlaneKind), ParamError> {
    let kind = SliceKind::parse(need(q, "slice")?)?;
    let args = SliceArgs {
        n: parse_uint("n", need(q, "n")?)?,
        a: opt_complex(q, "a")?,
        b: opt_complex(q, "b")?,
        t: opt_complex(q, "t")?,
    };
    Ok((kind, plane_kind(kind, &args)?))
}

fn overlays_from_query(q: &Q) -> Result<Vec<Overlay>, ParamError> {
    match field(q, "overlay") {
        None | Some("") => Ok(Vec::new()),
        Some(list) => list
            .split(',')
            .map(|s| Overlay::parse(s.trim()).ok_or_else(|| ParamError::Malformed(format!("unknown overlay {s:?}"))))
            .collect(),
    }
}

/// A validated `/tile` request.
#[derive(Debug, Clone)]
pub struct TileRequest {
    pub spec: PlaneSpec,
    pub viewport: Viewport,
}

impl TileRequest {
    pub fn from_query(q: &HashMap<String, String>) -> Result<TileRequest, ParamError> {
        let (_, kind) = slice_from_query(q)?;
        let cx = field(q, "cx").map(|s| parse_real("cx", s)).transpose()?.unwrap_or(0.0);
        let cy = field(q, "cy").map(|s| parse_real("cy", s)).transpose()?.unwrap_or(0.0);
        let w = check_width(parse_real("w", need(q, "w")?)?)?;
        let px = check_px(field(q, "px").map(|s| parse_uint("px", s)).transpose()?.unwrap_or(DEFAULT_TILE_PX))?;
        let max_iter = match field(q, "max_iter") {
            Some(s) => check_budget(parse_uint("max_iter", s)?)?,
            None => default_budget(w),
        };
        let viewport = Viewport::square(Complex64::new(cx, cy), w, px)
            .map_err(|e| ParamError::OutOfRange(e.to_string()))?;
        let spec = PlaneSpec::new(kind, max_iter).with_overlays(&overlays_from_query(q)?);
        Ok(TileRequest { spec, viewport })
    }

    pub fn render_png(&self) -> Result<Vec<u8>, ApiError> {
        let img = render_plane(&self.spec, &self.viewport);
        encode_image(&img, ImageFormat::Png).map_err(|e| ApiError::Internal(e.to_string()))
    }
}

async fn tile(State(state): State<AppState>, Query(q): Query<Q>) -> Result<Response, ApiError> {
    let req = TileRequest::from_query(&q)?;
    let _permit = state
        .tiles
        .acquire()
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    let png = tokio::task::spawn_blocking(move || req.render_png())
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok((
        [
            (header::CONTENT_TYPE, "image/png"),
            (header::CACHE_CONTROL, "public, max-age=31536000, immutable"),
        ],
        png,
    )
        .into_response())
}

/// Classification record for one parameter: both critical orbits, the
/// pixel color, and `|Φ|` when the point lies in a capture component of the
/// fixed-critical slice.
pub fn classify_record(q: &HashMap<String, String>) -> Result<Value, ParamError> {
    let (kind, plane) = slice_from_query(q)?;
    let slice = match plane {
        PlaneKind::ParameterSlice(s) => s,
        PlaneKind::DynamicalPlane(_) => {
            return Err(ParamError::Malformed("classify takes a parameter slice, not julia".into()))
        }
    };
    let point = parse_complex(need(q, "point")?)?;
    let max_iter = match field(q, "max_iter") {
        Some(s) => check_budget(parse_uint("max_iter", s)?)?,
        None => DEFAULT_BUDGET,
    };
    let p = slice
        .params_at(point)
        .map_err(|e| ParamError::OutOfRange(format!("degenerate parameter: {e}")))?;
    let c = classify_parameter(&slice, point, max_iter, &Palette::default())
        .map_err(|e| ParamError::OutOfRange(e.to_string()))?;
    let phi = match slice {
        SliceSpec::FixedCrit { .. } if c.minus.outcome == Outcome::AttractedToVPlus => {
            phi_of_map(&p).ok().map(|v| v.modulus)
        }
        _ => None,
    };
    Ok(json!({
        "slice": kind.name(),
        "n": slice.n(),
        "point": point,
        "max_iter": max_iter,
        "a": p.a(),
        "b": p.b(),
        "v_plus": p.v_plus(),
        "v_minus": p.v_minus(),
        "plus": c.plus,
        "minus": c.minus,
        "color": c.color,
        "phi_modulus": phi,
    }))
}

async fn classify(Query(q): Query<Q>) -> Result<Json<Value>, ApiError> {
    let q2 = q.clone();
    let record = tokio::task::spawn_blocking(move || classify_record(&q2))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(record))
}

/// Center or spine records for `/loci`.
pub fn loci_record(q: &HashMap<String, String>) -> Result<Value, ParamError> {
    let n_raw = need(q, "n")?;
    let order = if n_raw == "inf" {
        SpineOrder::Infinite
    } else {
        SpineOrder::Finite(check_degree(parse_uint("n", n_raw)?)?)
    };
    let n_json = match order {
        SpineOrder::Infinite => json!("inf"),
        SpineOrder::Finite(n) => json!(n),
    };
    match need(q, "kind")? {
        "centers" => {
            let SpineOrder::Finite(n) = order else {
                return Err(ParamError::Malformed("centers need a finite n".into()));
            };
            let records: Vec<Value> = centers(n)
                .map_err(|e| ParamError::OutOfRange(e.to_string()))?
                .into_iter()
                .map(|c| json!({ "k": c.k, "a": c.a, "relation": c.relation.label(), "residual": c.residual }))
                .collect();
            Ok(json!({ "n": n_json, "kind": "centers", "records": records }))
        }
        "spine" => {
            let samples = match field(q, "samples") {
                Some(s) => parse_uint("samples", s)?,
                None => DEFAULT_LOCI_SAMPLES,
            };
            if !(1..=MAX_LOCI_SAMPLES).contains(&samples) {
                return Err(ParamError::Malformed(format!("samples must be in 1..={MAX_LOCI_SAMPLES}")));
            }
            let records: Vec<Value> = spine_polyline(order, samples)
                .map_err(|e| ParamError::OutOfRange(e.to_string()))?
                .into_iter()
                .map(|s| json!({ "theta": s.theta, "a": s.a }))
                .collect();
            Ok(json!({ "n": n_json, "kind": "spine", "samples": samples, "records": records }))
        }
        other => Err(ParamError::Malformed(format!("unknown kind {other:?} (centers, spine)"))),
    }
}

async fn loci(Query(q): Query<Q>) -> Result<Json<Value>, ApiError> {
    // Loci errors are all client errors.
    let record = tokio::task::spawn_blocking(move || loci_record(&q))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    Ok(Json(record))
}

pub fn router(config: &ServiceConfig) -> Router {
    let origin = match &config.ui_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => AllowOrigin::exact(v),
            Err(_) => AllowOrigin::any(),
        },
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new().allow_origin(origin).allow_methods([Method::GET]);
    let state = AppState {
        tiles: Arc::new(Semaphore::new(config.max_concurrent_tiles.max(1))),
    };
    Router::new()
        .route("/tile", get(tile))
        .route("/classify", get(classify))
        .route("/loci", get(loci))
        .layer(cors)
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(&config)).await
}
