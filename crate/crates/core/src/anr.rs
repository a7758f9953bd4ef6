//! Multi-modal journeys by simplified access-node routing.
//!
//! A query picks the `k` stops nearest to the source and to the destination,
//! routes on the road graph from the source to each source-side stop and from
//! each destination-side stop to the destination, runs connection scan between
//! every pair of stops, and compares the cheapest combination with a plain
//! road-only route.

use thiserror::Error;

use crate::csa::{csa_query, Leg};
use crate::geo::GeoPoint;
use crate::model::{build_link_graph, LinkGraph, ModeSet, RoadGraph, Seconds, Timetable, TransportMode};
use crate::model::{ModelError, TransitGraph};
use crate::route_graph::{dijkstra, Path, RouteError, SearchStats};
use crate::spatial::{Hit, PointIndex};

/// Access nodes per side.
pub const DEFAULT_ACCESS_NODES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum AnrError {
    #[error("no road node near {0:?}")]
    Unresolvable(GeoPoint),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("access node count must be at least 1")]
    ZeroK,
    #[error("mode set is empty")]
    NoModes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Node(usize),
    Point(GeoPoint),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnrQuery {
    pub from: Endpoint,
    pub to: Endpoint,
    pub dep_time: Seconds,
    pub modes: ModeSet,
    pub k: usize,
}

impl AnrQuery {
    pub fn new(from: Endpoint, to: Endpoint, dep_time: Seconds, modes: ModeSet) -> Self {
        AnrQuery { from, to, dep_time, modes, k: DEFAULT_ACCESS_NODES }
    }
}

/// One homogeneous piece of a journey. Times are seconds of the service day.
#[derive(Debug, Clone, PartialEq)]
pub struct JourneyLeg {
    pub mode: TransportMode,
    pub coordinates: Vec<GeoPoint>,
    pub departure: f64,
    pub arrival: f64,
    /// Road or line name, when known.
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiModalJourney {
    pub legs: Vec<JourneyLeg>,
    pub departure: f64,
    pub arrival: f64,
    /// Seconds from departure to arrival, waiting included.
    pub cost: f64,
}

impl MultiModalJourney {
    pub fn total_cost(&self) -> f64 {
        self.cost
    }

    pub fn uses(&self, mode: TransportMode) -> bool {
        self.legs.iter().any(|l| l.mode == mode)
    }
}

/// Sub-query counters of one ANR query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnrStats {
    pub nn_queries: usize,
    pub road_searches: usize,
    pub csa_queries: usize,
    pub road_only_searches: usize,
    /// Nodes settled by road searches plus connections scanned by CSA.
    pub work: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnrResult {
    /// The cheapest journey found, road-only or combined.
    pub best: Option<MultiModalJourney>,
    /// The road-only candidate, if reachable.
    pub road_only: Option<MultiModalJourney>,
    pub stats: AnrStats,
}

/// Road graph, timetable and the spatial indexes tying them together.
#[derive(Debug, Clone)]
pub struct Planner {
    pub road: RoadGraph,
    pub timetable: Timetable,
    pub road_index: PointIndex,
    pub stop_index: PointIndex,
    /// Nearest road node of every stop.
    pub stop_links: Vec<Option<usize>>,
}

/// The `k` stops nearest to `p`, ascending by distance.
pub fn select_access_nodes(stop_index: &PointIndex, p: &GeoPoint, k: usize) -> Vec<Hit> {
    stop_index.k_closest(p, k)
}

impl Planner {
    pub fn new(road: RoadGraph, timetable: Timetable) -> Self {
        let road_index = PointIndex::build(road.nodes().iter().map(|n| n.point));
        let stop_index = PointIndex::build(timetable.stops().iter().map(|s| s.point));
        let stop_links = timetable.stops().iter().map(|s| road_index.closest(&s.point).map(|h| h.item)).collect();
        Planner { road, timetable, road_index, stop_index, stop_links }
    }

    /// Link graph over the planner's road graph and `transit`.
    pub fn link_graph<'a>(&'a self, transit: &TransitGraph) -> Result<LinkGraph<'a>, ModelError> {
        build_link_graph(&self.road, transit, &self.road_index)
    }

    pub fn resolve(&self, e: Endpoint) -> Result<usize, AnrError> {
        match e {
            Endpoint::Node(n) if n < self.road.node_count() => Ok(n),
            Endpoint::Node(n) => Err(RouteError::InvalidNode { node: n, count: self.road.node_count() }.into()),
            Endpoint::Point(p) => self.road_index.closest(&p).map(|h| h.item).ok_or(AnrError::Unresolvable(p)),
        }
    }

    pub fn query(&self, q: &AnrQuery) -> Result<AnrResult, AnrError> {
        if q.k == 0 {
            return Err(AnrError::ZeroK);
        }
        if q.modes.is_empty() {
            return Err(AnrError::NoModes);
        }
        let s = self.resolve(q.from)?;
        let t = self.resolve(q.to)?;
        let road_modes = q.modes.intersection(ModeSet::ROAD);
        let dep = q.dep_time as f64;
        let mut stats = AnrStats::default();

        let (road_path, st) = dijkstra(&self.road, s, t, road_modes)?;
        stats.road_only_searches += 1;
        stats.work += st.settled;
        let road_only = road_path.map(|p| self.road_journey(&p, dep, road_modes));
        let mut best = road_only.clone();

        if q.modes.contains(TransportMode::Tram) && !self.stop_index.is_empty() {
            let src_access = select_access_nodes(&self.stop_index, &self.road.node(s).point, q.k);
            let dst_access = select_access_nodes(&self.stop_index, &self.road.node(t).point, q.k);
            stats.nn_queries += 2;

            let mut first = Vec::new();
            for a in &src_access {
                let path = self.road_leg(s, self.stop_links[a.item], road_modes, &mut stats)?;
                first.push((a.item, path));
            }
            let mut last = Vec::new();
            for b in &dst_access {
                let path = self.road_leg_from(self.stop_links[b.item], t, road_modes, &mut stats)?;
                last.push((b.item, path));
            }

            for (a, p1) in &first {
                let Some(p1) = p1 else { continue };
                let tau = (dep + p1.cost).ceil() as Seconds;
                for (b, p3) in &last {
                    let r = csa_query(&self.timetable, *a, *b, tau).expect("access stops belong to the timetable");
                    stats.csa_queries += 1;
                    stats.work += r.scanned;
                    let (Some(j), Some(p3)) = (r.journey, p3) else { continue };
                    let total = j.arrival as f64 + p3.cost - dep;
                    if best.as_ref().is_none_or(|b| total < b.total_cost()) {
                        let mut legs = self.road_journey(p1, dep, road_modes).legs;
                        legs.extend(self.transit_legs(&j.legs, j.departure));
                        legs.extend(self.road_journey(p3, j.arrival as f64, road_modes).legs);
                        best = Some(MultiModalJourney { legs, departure: dep, arrival: dep + total, cost: total });
                    }
                }
            }
        }
        Ok(AnrResult { best, road_only, stats })
    }

    fn road_leg(
        &self,
        from: usize,
        to: Option<usize>,
        modes: ModeSet,
        stats: &mut AnrStats,
    ) -> Result<Option<Path>, AnrError> {
        let Some(to) = to else { return Ok(None) };
        let (p, st): (Option<Path>, SearchStats) = dijkstra(&self.road, from, to, modes)?;
        stats.road_searches += 1;
        stats.work += st.settled;
        Ok(p)
    }

    fn road_leg_from(
        &self,
        from: Option<usize>,
        to: usize,
        modes: ModeSet,
        stats: &mut AnrStats,
    ) -> Result<Option<Path>, AnrError> {
        let Some(from) = from else { return Ok(None) };
        self.road_leg(from, Some(to), modes, stats)
    }

    /// Splits a road path into legs of constant mode.
    pub fn road_journey(&self, p: &Path, dep: f64, modes: ModeSet) -> MultiModalJourney {
        let mut legs: Vec<JourneyLeg> = Vec::new();
        let mut now = dep;
        for e in &p.edges {
            let mode = e.mode.unwrap_or(TransportMode::Foot);
            let name = self.edge_name(e.src, e.dst, modes);
            let end = now + e.weight;
            match legs.last_mut() {
                Some(l) if l.mode == mode => {
                    l.coordinates.push(self.road.node(e.dst).point);
                    l.arrival = end;
                    if l.name.is_none() {
                        l.name = name;
                    }
                }
                _ => legs.push(JourneyLeg {
                    mode,
                    coordinates: vec![self.road.node(e.src).point, self.road.node(e.dst).point],
                    departure: now,
                    arrival: end,
                    name,
                }),
            }
            now = end;
        }
        MultiModalJourney { legs, departure: dep, arrival: dep + p.cost, cost: p.cost }
    }

    fn edge_name(&self, src: usize, dst: usize, modes: ModeSet) -> Option<String> {
        self.road
            .out_edges(src)
            .iter()
            .filter(|e| e.dst as usize == dst && e.weight(modes).is_some())
            .min_by(|a, b| a.weight(modes).unwrap().0.total_cmp(&b.weight(modes).unwrap().0))
            .and_then(|e| e.name)
            .map(|n| self.road.name(n).to_string())
    }

    fn transit_legs(&self, legs: &[Leg], start: Seconds) -> Vec<JourneyLeg> {
        let point = |s: u32| self.timetable.stop(s as usize).point;
        let mut now = start as f64;
        let mut out = Vec::new();
        for leg in legs {
            match leg {
                Leg::Footpath(f) => {
                    out.push(JourneyLeg {
                        mode: TransportMode::Foot,
                        coordinates: vec![point(f.from), point(f.to)],
                        departure: now,
                        arrival: now + f.duration as f64,
                        name: None,
                    });
                    now += f.duration as f64;
                }
                Leg::Trip { trip, connections } => {
                    let mut coordinates = vec![point(connections[0].dep_stop)];
                    coordinates.extend(connections.iter().map(|c| point(c.arr_stop)));
                    let t = &self.timetable.trips()[*trip as usize];
                    let arrival = connections[connections.len() - 1].arr_time as f64;
                    out.push(JourneyLeg {
                        mode: TransportMode::Tram,
                        coordinates,
                        departure: connections[0].dep_time as f64,
                        arrival,
                        name: Some(t.name.clone().unwrap_or_else(|| t.id.clone())),
                    });
                    now = arrival;
                }
            }
        }
        out
    }
}

/// Earliest arrival through the link graph departing at `dep_time`, as a
/// cost in seconds and the node path. Link edges wait for their arrival node.
pub fn modified_dijkstra_link_graph(
    lg: &LinkGraph<'_>,
    s: usize,
    t: usize,
    modes: ModeSet,
    dep_time: Seconds,
) -> Result<(Option<Path>, SearchStats), RouteError> {
    dijkstra(&lg.at(dep_time), s, t, modes)
}
