//! Network representations: the multi-modal road graph, the realistic
//! time-expanded transit graph, the timetable and the link graph joining road
//! and transit graphs.
//!
//! All times are integer seconds since midnight of one service day. Values
//! past 86 400 are legal and denote trips running over midnight.

mod link;
mod mode;
mod road;
mod timetable;
mod transit;

use thiserror::Error;

pub use link::{build_link_graph, LinkGraph, TimedLinkGraph};
pub use mode::{ModeSet, ParseModeError, TransportMode};
pub use road::{edge_weight, kmh_to_mps, RoadEdge, RoadGraph, RoadGraphBuilder, RoadNode};
pub use timetable::{Connection, Footpath, Stop, Timetable, Trip, Violation};
pub use transit::{EventKind, TransitEdge, TransitEdgeKind, TransitGraph, TransitNode, TripEvent};

/// Seconds since midnight of the service day.
pub type Seconds = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("node id {0} inserted twice")]
    DuplicateNode(i64),
    #[error("edge references unknown node index {0}")]
    UnknownNode(usize),
    #[error("edge {src} -> {dst}: invalid distance {distance}")]
    InvalidDistance { src: usize, dst: usize, distance: f64 },
    #[error("edge {src} -> {dst}: no transport mode")]
    NoModes { src: usize, dst: usize },
    #[error("edge {src} -> {dst}: invalid speed {speed} km/h for {mode}")]
    InvalidSpeed { src: usize, dst: usize, mode: TransportMode, speed: f64 },
    #[error("road graph is empty, cannot link stops")]
    EmptyRoadGraph,
}
