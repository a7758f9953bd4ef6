//! Small hand-made networks for tests, demos and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anr::Planner;
use crate::geo::GeoPoint;
use crate::model::{Footpath, RoadGraph, RoadGraphBuilder, Seconds, Stop, Timetable, TransitGraph, TransportMode, Trip, TripEvent};
use crate::spatial::PointIndex;

pub const FREIBURG_HBF: (f64, f64) = (47.9990, 7.8421);
pub const OFFENBURG: (f64, f64) = (48.4768, 7.9466);
pub const KARLSRUHE_HBF: (f64, f64) = (49.0069, 8.4037);

pub fn hm(h: u32, m: u32) -> Seconds {
    h * 3600 + m * 60
}

fn point((lat, lng): (f64, f64)) -> GeoPoint {
    GeoPoint::from_degrees(lat, lng).expect("valid sample coordinate")
}

/// Three stations f, o, k (indices 0, 1, 2) and four trains:
///
/// | train    | route   | times          |
/// |----------|---------|----------------|
/// | ICE 104  | f-o-k   | 15:56, 16:28/16:29, 16:58 |
/// | RE 17024 | f-o     | 16:03, 16:50   |
/// | RE 17322 | o-k     | 16:35, 17:19   |
/// | ICE 79   | k-f     | 19:10, 20:10   |
pub fn rhine_valley_events() -> (Vec<Stop>, Vec<Trip>, Vec<(u32, Vec<TripEvent>)>) {
    let stops = vec![
        Stop { id: "f".into(), name: "Freiburg Hbf".into(), point: point(FREIBURG_HBF) },
        Stop { id: "o".into(), name: "Offenburg".into(), point: point(OFFENBURG) },
        Stop { id: "k".into(), name: "Karlsruhe Hbf".into(), point: point(KARLSRUHE_HBF) },
    ];
    let trips = ["ICE 104", "RE 17024", "RE 17322", "ICE 79"]
        .map(|n| Trip { id: n.into(), name: Some(n.into()) })
        .to_vec();
    let ev = |stop, arrival, departure| TripEvent { stop, arrival, departure };
    let events = vec![
        (0, vec![ev(0, hm(15, 56), hm(15, 56)), ev(1, hm(16, 28), hm(16, 29)), ev(2, hm(16, 58), hm(16, 58))]),
        (1, vec![ev(0, hm(16, 3), hm(16, 3)), ev(1, hm(16, 50), hm(16, 50))]),
        (2, vec![ev(1, hm(16, 35), hm(16, 35)), ev(2, hm(17, 19), hm(17, 19))]),
        (3, vec![ev(2, hm(19, 10), hm(19, 10)), ev(0, hm(20, 10), hm(20, 10))]),
    ];
    (stops, trips, events)
}

/// The timetable of [`rhine_valley_events`] with 300 s self-loop footpaths.
pub fn rhine_valley_timetable() -> Timetable {
    let (stops, trips, events) = rhine_valley_events();
    let footpaths = (0..stops.len() as u32).map(|s| Footpath { from: s, duration: 300, to: s }).collect();
    Timetable::new(stops, trips, Timetable::connections_of(&events), footpaths)
}

/// The transit graph of [`rhine_valley_events`] with a 5 minute transfer duration.
pub fn rhine_valley_transit_graph() -> TransitGraph {
    let (stops, _, events) = rhine_valley_events();
    TransitGraph::build(stops.iter().map(|s| s.point).collect(), &events, 300)
}

/// Road nodes of the two-cluster network, by external id.
pub mod node {
    /// At Freiburg Hbf.
    pub const FREIBURG_STATION: i64 = 1;
    /// 500 m west of Freiburg Hbf.
    pub const FREIBURG_HOME: i64 = 2;
    /// 1 km north of Freiburg Hbf, start of the cycleway.
    pub const FREIBURG_NORTH: i64 = 3;
    /// At Offenburg station, on the cycleway.
    pub const OFFENBURG_STATION: i64 = 4;
    /// At Karlsruhe Hbf.
    pub const KARLSRUHE_STATION: i64 = 5;
    /// 800 m east of Karlsruhe Hbf.
    pub const KARLSRUHE_OFFICE: i64 = 6;
}

/// Two small street clusters around Freiburg Hbf and Karlsruhe Hbf. The only
/// road between them is a cycleway through Offenburg, so cars cannot cross.
pub fn two_cluster_road() -> RoadGraph {
    use TransportMode::*;
    let street = [(Foot, 5.0), (Bike, 14.0), (Car, 50.0)];
    let cycleway = [(Foot, 5.0), (Bike, 14.0)];
    let offset = |(lat, lng): (f64, f64), dlat_m: f64, dlng_m: f64| {
        let m_per_deg = 111_194.93;
        (lat + dlat_m / m_per_deg, lng + dlng_m / (m_per_deg * lat.to_radians().cos()))
    };
    let mut b = RoadGraphBuilder::new();
    let nodes = [
        (node::FREIBURG_STATION, FREIBURG_HBF),
        (node::FREIBURG_HOME, offset(FREIBURG_HBF, 0.0, -500.0)),
        (node::FREIBURG_NORTH, offset(FREIBURG_HBF, 1000.0, 0.0)),
        (node::OFFENBURG_STATION, OFFENBURG),
        (node::KARLSRUHE_STATION, KARLSRUHE_HBF),
        (node::KARLSRUHE_OFFICE, offset(KARLSRUHE_HBF, 0.0, 800.0)),
    ];
    for (id, p) in nodes {
        b.add_node(id, point(p)).unwrap();
    }
    let both = |b: &mut RoadGraphBuilder, u: i64, v: i64, speeds: &[(TransportMode, f64)], name: &str| {
        let (u, v) = (b.index_of(u).unwrap(), b.index_of(v).unwrap());
        b.add_road(u, v, speeds, Some(name)).unwrap();
        b.add_road(v, u, speeds, Some(name)).unwrap();
    };
    both(&mut b, node::FREIBURG_HOME, node::FREIBURG_STATION, &street, "Bismarckallee");
    both(&mut b, node::FREIBURG_STATION, node::FREIBURG_NORTH, &street, "Stefan-Meier-Straße");
    both(&mut b, node::FREIBURG_NORTH, node::OFFENBURG_STATION, &cycleway, "Rheintalradweg");
    both(&mut b, node::OFFENBURG_STATION, node::KARLSRUHE_STATION, &cycleway, "Rheintalradweg");
    both(&mut b, node::KARLSRUHE_STATION, node::KARLSRUHE_OFFICE, &street, "Kriegsstraße");
    b.build()
}

/// [`two_cluster_road`] with the Rhine valley timetable.
pub fn two_cluster_planner() -> Planner {
    Planner::new(two_cluster_road(), rhine_valley_timetable())
}

/// A random geometric road graph: `n` nodes scattered over a square around
/// Freiburg whose size grows with `n`, each joined in both directions to its
/// `degree` nearest neighbours. Ways get random classes (car 30-120 km/h,
/// some car-only, some cycleways).
pub fn geometric_graph(n: usize, degree: usize, seed: u64) -> RoadGraph {
    use TransportMode::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // about 150 m between neighbours
    let side_m = 150.0 * (n as f64).sqrt();
    let (lat0, lng0) = FREIBURG_HBF;
    let m_per_deg = 111_194.93;
    let mut b = RoadGraphBuilder::new();
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let lat = lat0 + rng.gen_range(0.0..side_m) / m_per_deg;
        let lng = lng0 + rng.gen_range(0.0..side_m) / (m_per_deg * lat0.to_radians().cos());
        let p = point((lat, lng));
        b.add_node(i as i64, p).unwrap();
        points.push(p);
    }
    let index = PointIndex::build(points.iter().copied());
    let mut seen = std::collections::HashSet::new();
    for (u, p) in points.iter().enumerate() {
        for hit in index.k_closest(p, degree + 1) {
            let v = hit.item;
            if v == u || !seen.insert((u.min(v), u.max(v))) {
                continue;
            }
            let car = [30.0, 50.0, 70.0, 100.0, 120.0][rng.gen_range(0..5)];
            let kind = rng.gen_range(0..10);
            let speeds: Vec<(TransportMode, f64)> = match kind {
                0 => vec![(Car, car)],
                1 => vec![(Foot, 5.0), (Bike, 14.0)],
                _ => vec![(Foot, 5.0), (Bike, 14.0), (Car, car)],
            };
            b.add_road(u, v, &speeds, None).unwrap();
            b.add_road(v, u, &speeds, None).unwrap();
        }
    }
    b.build()
}
