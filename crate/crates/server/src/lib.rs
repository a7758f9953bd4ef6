//! HTTP front end for the route planner.
//!
//! `POST /route` plans a multi-modal journey, `GET /nearest` snaps a
//! coordinate to the closest road node. Everything else falls through to the
//! static directory, when one is configured.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use routeplanner::anr::{AnrError, AnrQuery, Endpoint, MultiModalJourney, Planner};
use routeplanner::geo::GeoPoint;
use routeplanner::gtfs::{build_timetable, parse_gtfs, GtfsConfig};
use routeplanner::model::{ModeSet, Seconds, Timetable, TransportMode};
use routeplanner::osm::{parse_osm_file, OsmConfig};

/// Shared, immutable query state.
#[derive(Clone)]
pub struct AppState {
    planner: Arc<Planner>,
}

impl AppState {
    pub fn new(planner: Planner) -> Self {
        AppState { planner: Arc::new(planner) }
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }
}

/// Builds the planner from an OSM extract and an optional GTFS directory.
pub fn load_planner(osm: &Path, gtfs: Option<&Path>, date: Option<NaiveDate>) -> anyhow::Result<Planner> {
    let out = parse_osm_file(osm, &OsmConfig::default()).with_context(|| format!("reading {}", osm.display()))?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    log::info!("road graph: {} nodes, {} edges", out.graph.node_count(), out.graph.edge_count());
    let timetable = match gtfs {
        Some(dir) => {
            let config = GtfsConfig { date, ..GtfsConfig::default() };
            let feed = parse_gtfs(dir, &config).with_context(|| format!("reading {}", dir.display()))?;
            build_timetable(&feed, &config)?
        }
        None => Timetable::new(Vec::new(), Vec::new(), Vec::new(), Vec::new()),
    };
    log::info!("timetable: {} stops, {} connections", timetable.stops().len(), timetable.connections().len());
    Ok(Planner::new(out.graph, timetable))
}

pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let api = Router::new().route("/route", post(handle_route)).route("/nearest", get(handle_nearest)).with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(PathBuf::from(dir))),
        None => api,
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, message: message.into() }
    }

    fn unavailable(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::SERVICE_UNAVAILABLE, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}", self.message);
        }
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DepTime {
    Seconds(u32),
    Text(String),
}

impl DepTime {
    /// Seconds of the service day. Strings may be `HH:MM[:SS]` or a full
    /// ISO local date-time, whose date part is ignored.
    pub fn seconds(&self) -> Option<Seconds> {
        match self {
            DepTime::Seconds(s) => Some(*s),
            DepTime::Text(s) => {
                let s = s.trim();
                let time = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
                    .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M"))
                    .map(|dt| dt.time())
                    .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M:%S"))
                    .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M"))
                    .ok()?;
                Some(time.num_seconds_from_midnight())
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Place {
    Node(i64),
    Coordinate { lat: f64, lng: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RouteRequest {
    pub dep_time: DepTime,
    pub modes: Vec<String>,
    pub from: Place,
    pub to: Place,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegJson {
    pub mode: &'static str,
    pub coordinates: Vec<[f64; 2]>,
    pub departure: f64,
    pub arrival: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct JourneyJson {
    pub legs: Vec<LegJson>,
    pub departure: f64,
    pub arrival: f64,
    pub total_cost: f64,
}

impl From<&MultiModalJourney> for JourneyJson {
    fn from(j: &MultiModalJourney) -> Self {
        let legs = j
            .legs
            .iter()
            .map(|l| LegJson {
                mode: l.mode.as_str(),
                coordinates: l.coordinates.iter().map(|p| [p.lat_degrees(), p.lng_degrees()]).collect(),
                departure: l.departure,
                arrival: l.arrival,
                name: l.name.clone(),
            })
            .collect();
        JourneyJson { legs, departure: j.departure, arrival: j.arrival, total_cost: j.total_cost() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteResponse {
    pub journeys: Vec<JourneyJson>,
}

fn endpoint(planner: &Planner, place: &Place, field: &str) -> Result<Endpoint, ApiError> {
    match *place {
        Place::Node(id) => planner
            .road
            .index_of(id)
            .map(Endpoint::Node)
            .ok_or_else(|| ApiError::bad_request(format!("{field}: unknown node {id}"))),
        Place::Coordinate { lat, lng } => {
            let p = GeoPoint::from_degrees(lat, lng).map_err(|e| ApiError::bad_request(format!("{field}: {e}")))?;
            if planner.road_index.is_empty() {
                return Err(ApiError::bad_request(format!("{field}: no road node to snap to")));
            }
            Ok(Endpoint::Point(p))
        }
    }
}

/// Validates a request and plans it. Split from the handler so the work can
/// run off the async executor.
pub fn plan(planner: &Planner, req: &RouteRequest) -> Result<RouteResponse, ApiError> {
    let dep_time = req.dep_time.seconds().ok_or_else(|| ApiError::bad_request("depTime: expected seconds or HH:MM[:SS]"))?;
    let mut modes = ModeSet::EMPTY;
    for m in &req.modes {
        let mode: TransportMode = m.parse().map_err(|e| ApiError::bad_request(format!("modes: {e}")))?;
        modes.insert(mode);
    }
    if modes.is_empty() {
        return Err(ApiError::bad_request("modes: at least one mode is required"));
    }
    let from = endpoint(planner, &req.from, "from")?;
    let to = endpoint(planner, &req.to, "to")?;
    let result = match planner.query(&AnrQuery::new(from, to, dep_time, modes)) {
        Ok(r) => r,
        Err(e @ AnrError::Unresolvable(_)) => return Err(ApiError::bad_request(e.to_string())),
        Err(e) => return Err(ApiError::internal(e.to_string())),
    };
    let mut journeys = Vec::new();
    if let Some(best) = &result.best {
        journeys.push(JourneyJson::from(best));
    }
    if let Some(road) = &result.road_only {
        if result.best.as_ref() != Some(road) {
            journeys.push(JourneyJson::from(road));
        }
    }
    Ok(RouteResponse { journeys })
}

// The body is taken raw so every parse failure maps to 400; the Json
// extractor would answer some of them with 415 or 422.
async fn handle_route(State(state): State<AppState>, body: Bytes) -> Result<Json<RouteResponse>, ApiError> {
    let req: RouteRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed request: {e}")))?;
    let planner = state.planner.clone();
    tokio::task::spawn_blocking(move || plan(&planner, &req))
        .await
        .map_err(|e| ApiError::internal(format!("route task failed: {e}")))?
        .map(Json)
}

#[derive(Debug, Deserialize)]
pub struct NearestParams {
    lat: Option<String>,
    lng: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestResponse {
    pub id: i64,
    pub lat: f64,
    pub lng: f64,
}

fn degrees(value: Option<&str>, name: &str) -> Result<f64, ApiError> {
    let v = value.ok_or_else(|| ApiError::bad_request(format!("missing parameter {name}")))?;
    v.trim().parse::<f64>().map_err(|_| ApiError::bad_request(format!("invalid {name}: {v:?}")))
}

pub fn nearest(planner: &Planner, params: &NearestParams) -> Result<NearestResponse, ApiError> {
    let lat = degrees(params.lat.as_deref(), "lat")?;
    let lng = degrees(params.lng.as_deref(), "lng")?;
    let p = GeoPoint::from_degrees(lat, lng).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let hit = planner.road_index.closest(&p).ok_or_else(|| ApiError::unavailable("road index is empty"))?;
    let node = planner.road.node(hit.item);
    Ok(NearestResponse { id: node.id, lat: node.point.lat_degrees(), lng: node.point.lng_degrees() })
}

async fn handle_nearest(
    State(state): State<AppState>,
    params: Result<Query<NearestParams>, QueryRejection>,
) -> Result<Json<NearestResponse>, ApiError> {
    let Query(params) = params.map_err(|e| ApiError::bad_request(e.body_text()))?;
    nearest(&state.planner, &params).map(Json)
}
