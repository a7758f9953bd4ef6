//! Multi-modal route planning on road and public transit networks.
//!
//! Road networks come from OSM XML, transit networks from GTFS feeds. Queries
//! run Dijkstra, A* with crow-flies or landmark heuristics, the connection scan
//! algorithm, or a simplified access-node routing that combines road search
//! with connection scan.

pub mod anr;
pub mod bench;
pub mod cover_tree;
pub mod csa;
pub mod geo;
pub mod graph;
pub mod gtfs;
pub mod model;
pub mod osm;
pub mod route_graph;
pub mod spatial;
pub mod samples;
pub mod snapshot;
