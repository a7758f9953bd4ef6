use super::{
    EventKind, ModeSet, ModelError, RoadGraph, TransitEdge, TransitEdgeKind, TransitGraph, TransitNode, TransportMode,
};
use crate::graph::{Arc, Network};
use crate::spatial::PointIndex;

/// Road graph and transit graph joined at stops.
///
/// Node ids `0..road.node_count()` are road nodes, the following ids are
/// transit nodes. Each stop is linked to its nearest road node: a 0-weight
/// link edge leads from the road node to every arrival node of the stop, and
/// a 0-weight exit edge leads back from every such arrival node.
#[derive(Debug, Clone)]
pub struct LinkGraph<'a> {
    road: &'a RoadGraph,
    transit: TransitGraph,
    /// Arrival nodes (transit-local ids) reachable per road node, ascending by time.
    first_link: Vec<u32>,
    links: Vec<u32>,
    /// Road node per transit node, for arrival nodes at linked stops.
    exits: Vec<Option<u32>>,
    stop_links: Vec<Option<u32>>,
}

/// Links every stop of `transit` to its nearest road node. `road_index` must
/// index the road nodes by position. Trips starting with a departure node get
/// a leading arrival node at the same time joined by a 0-weight edge.
pub fn build_link_graph<'a>(
    road: &'a RoadGraph,
    transit: &TransitGraph,
    road_index: &PointIndex,
) -> Result<LinkGraph<'a>, ModelError> {
    let mut has_arrival = vec![false; transit.node_count()];
    for e in transit.edges() {
        if e.kind == TransitEdgeKind::Stay {
            has_arrival[e.dst as usize] = true;
        }
    }
    let mut extra_nodes = Vec::new();
    let mut extra_edges = Vec::new();
    for (i, n) in transit.nodes().iter().enumerate() {
        if n.event == EventKind::Departure && !has_arrival[i] {
            let id = (transit.node_count() + extra_nodes.len()) as u32;
            extra_nodes.push(TransitNode { event: EventKind::Arrival, ..*n });
            extra_edges.push(TransitEdge { src: id, dst: i as u32, weight: 0, kind: TransitEdgeKind::Stay });
        }
    }
    let transit = transit.extended(extra_nodes, extra_edges);

    if transit.stop_count() > 0 && road.is_empty() {
        return Err(ModelError::EmptyRoadGraph);
    }
    let stop_links: Vec<Option<u32>> = (0..transit.stop_count())
        .map(|s| road_index.closest(&transit.stop_point(s)).map(|h| h.item as u32))
        .collect();

    let mut per_road: Vec<Vec<u32>> = vec![Vec::new(); road.node_count()];
    let mut exits = vec![None; transit.node_count()];
    for (i, n) in transit.nodes().iter().enumerate() {
        if n.event != EventKind::Arrival {
            continue;
        }
        if let Some(r) = stop_links[n.stop as usize] {
            per_road[r as usize].push(i as u32);
            exits[i] = Some(r);
        }
    }
    let mut first_link = Vec::with_capacity(road.node_count() + 1);
    let mut links = Vec::new();
    first_link.push(0);
    for mut list in per_road {
        list.sort_by_key(|&v| (transit.node(v as usize).time, v));
        links.extend(list);
        first_link.push(links.len() as u32);
    }
    Ok(LinkGraph { road, transit, first_link, links, exits, stop_links })
}

impl<'a> LinkGraph<'a> {
    pub fn road(&self) -> &'a RoadGraph {
        self.road
    }

    pub fn transit(&self) -> &TransitGraph {
        &self.transit
    }

    pub fn road_count(&self) -> usize {
        self.road.node_count()
    }

    pub fn link_edge_count(&self) -> usize {
        self.links.len()
    }

    /// Arrival nodes linked from road node `r`, as link-graph ids, ascending by time.
    pub fn links_of(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        let base = self.road_count();
        self.links[self.first_link[r] as usize..self.first_link[r + 1] as usize].iter().map(move |&v| base + v as usize)
    }

    /// Road node a stop is linked to.
    pub fn stop_link(&self, stop: usize) -> Option<usize> {
        self.stop_links[stop].map(|r| r as usize)
    }

    pub fn is_road(&self, v: usize) -> bool {
        v < self.road_count()
    }

    pub fn transit_node(&self, v: usize) -> Option<&TransitNode> {
        v.checked_sub(self.road_count()).map(|i| self.transit.node(i))
    }

    /// The link graph seen from a fixed departure time, see [`TimedLinkGraph`].
    pub fn at(&self, dep_time: u32) -> TimedLinkGraph<'_, 'a> {
        TimedLinkGraph { graph: self, dep_time: dep_time as f64 }
    }

    fn for_each_transit_arc<F: FnMut(Arc)>(&self, u: usize, allowed: ModeSet, f: &mut F) {
        let base = self.road_count();
        let local = u - base;
        self.transit.for_each_arc(local, 0.0, allowed, |a| f(Arc { to: base + a.to, ..a }));
        if let Some(r) = self.exits[local] {
            f(Arc { to: r as usize, weight: 0.0, mode: None });
        }
    }
}

/// The plain link graph: link edges cost 0 regardless of time.
impl Network for LinkGraph<'_> {
    fn node_count(&self) -> usize {
        self.road_count() + self.transit.node_count()
    }

    fn for_each_arc<F: FnMut(Arc)>(&self, u: usize, elapsed: f64, allowed: ModeSet, mut f: F) {
        if self.is_road(u) {
            self.road.for_each_arc(u, elapsed, allowed, &mut f);
            if allowed.contains(TransportMode::Tram) {
                for v in self.links_of(u) {
                    f(Arc { to: v, weight: 0.0, mode: None });
                }
            }
        } else {
            self.for_each_transit_arc(u, allowed, &mut f);
        }
    }
}

/// A link graph queried from a departure time.
///
/// Search costs are seconds since `dep_time`. Crossing a link edge into
/// arrival node `v` after `elapsed` seconds costs the wait
/// `v.time - (dep_time + elapsed)`; arrival nodes that already passed are
/// unusable.
#[derive(Debug, Clone, Copy)]
pub struct TimedLinkGraph<'g, 'a> {
    pub graph: &'g LinkGraph<'a>,
    pub dep_time: f64,
}

impl Network for TimedLinkGraph<'_, '_> {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn for_each_arc<F: FnMut(Arc)>(&self, u: usize, elapsed: f64, allowed: ModeSet, mut f: F) {
        let g = self.graph;
        if !g.is_road(u) {
            g.for_each_transit_arc(u, allowed, &mut f);
            return;
        }
        g.road.for_each_arc(u, elapsed, allowed, &mut f);
        if !allowed.contains(TransportMode::Tram) {
            return;
        }
        let now = self.dep_time + elapsed;
        let list = &g.links[g.first_link[u] as usize..g.first_link[u + 1] as usize];
        let start = list.partition_point(|&v| (g.transit.node(v as usize).time as f64) < now);
        for &v in &list[start..] {
            let wait = g.transit.node(v as usize).time as f64 - now;
            f(Arc { to: g.road_count() + v as usize, weight: wait, mode: None });
        }
    }
}
