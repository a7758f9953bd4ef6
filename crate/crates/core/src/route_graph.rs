//! Shortest paths on graphs: Dijkstra, A* with crow-flies or landmark
//! heuristics, and many-to-one queries.
//!
//! All variants share one label-setting engine, [`search`]. The queue uses lazy
//! deletion and pops equal keys in ascending node order, so two runs that
//! differ only by a zero heuristic settle the same nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::graph::{reverse_view, Network, Reversible};
use crate::model::{kmh_to_mps, EventKind, ModeSet, RoadGraph, Seconds, TransitGraph, TransportMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("node {node} not in graph with {count} nodes")]
    InvalidNode { node: usize, count: usize },
    #[error("no source node given")]
    NoSource,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Nodes polled from the queue with their final distance.
    pub settled: usize,
    /// Arcs inspected while relaxing settled nodes.
    pub relaxed: usize,
}

impl std::ops::AddAssign for SearchStats {
    fn add_assign(&mut self, other: Self) {
        self.settled += other.settled;
        self.relaxed += other.relaxed;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
    pub mode: Option<TransportMode>,
}

/// A chain of edges; empty when source and destination coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub source: usize,
    pub edges: Vec<PathEdge>,
    /// Sum of edge weights plus the initial offset of the source.
    pub cost: f64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn src(&self) -> usize {
        self.source
    }

    pub fn dest(&self) -> usize {
        self.edges.last().map_or(self.source, |e| e.dst)
    }

    pub fn nodes(&self) -> Vec<usize> {
        std::iter::once(self.source).chain(self.edges.iter().map(|e| e.dst)).collect()
    }

    /// Edges as `(src, weight, dst)` triples.
    pub fn triples(&self) -> Vec<(usize, f64, usize)> {
        self.edges.iter().map(|e| (e.src, e.weight, e.dst)).collect()
    }
}

const NO_PRED: u32 = u32::MAX;

/// Distances and predecessors of one search.
#[derive(Debug, Clone)]
pub struct SearchTree {
    dist: Vec<f64>,
    pred: Vec<u32>,
    pred_arc: Vec<(f64, Option<TransportMode>)>,
    settled: Vec<bool>,
    order: Vec<usize>,
    reached: Option<usize>,
    pub stats: SearchStats,
}

impl SearchTree {
    /// Final distance of a settled node, or the tentative one if the search
    /// stopped early. `None` when never reached.
    pub fn dist(&self, v: usize) -> Option<f64> {
        let d = self.dist[v];
        d.is_finite().then_some(d)
    }

    pub fn is_settled(&self, v: usize) -> bool {
        self.settled[v]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Nodes in the order they were settled.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// The target that stopped the search, if any.
    pub fn reached(&self) -> Option<usize> {
        self.reached
    }

    pub fn path_to(&self, v: usize) -> Option<Path> {
        if !self.dist[v].is_finite() {
            return None;
        }
        let mut edges = Vec::new();
        let mut cur = v;
        while self.pred[cur] != NO_PRED {
            let p = self.pred[cur] as usize;
            let (weight, mode) = self.pred_arc[cur];
            edges.push(PathEdge { src: p, dst: cur, weight, mode });
            cur = p;
        }
        edges.reverse();
        Some(Path { source: cur, edges, cost: self.dist[v] })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    key: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (key, node)
        other.key.total_cmp(&self.key).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_node<G: Network + ?Sized>(g: &G, node: usize) -> Result<(), RouteError> {
    if node < g.node_count() {
        Ok(())
    } else {
        Err(RouteError::InvalidNode { node, count: g.node_count() })
    }
}

/// The shared engine. Sources start with the given cost offsets; nodes are
/// polled by `cost + heuristic(node)`. The search stops after settling the
/// first node accepted by `is_target`, or when the queue runs empty.
///
/// The heuristic must be consistent for the result to be optimal.
pub fn search<G, H, T>(
    g: &G,
    sources: &[(usize, f64)],
    allowed: ModeSet,
    heuristic: H,
    is_target: T,
) -> Result<SearchTree, RouteError>
where
    G: Network + ?Sized,
    H: Fn(usize) -> f64,
    T: Fn(usize) -> bool,
{
    if sources.is_empty() {
        return Err(RouteError::NoSource);
    }
    let n = g.node_count();
    for &(s, _) in sources {
        check_node(g, s)?;
    }
    let mut tree = SearchTree {
        dist: vec![f64::INFINITY; n],
        pred: vec![NO_PRED; n],
        pred_arc: vec![(0.0, None); n],
        settled: vec![false; n],
        order: Vec::new(),
        reached: None,
        stats: SearchStats::default(),
    };
    let mut queue = BinaryHeap::new();
    for &(s, offset) in sources {
        if offset < tree.dist[s] {
            tree.dist[s] = offset;
            queue.push(Entry { key: offset + heuristic(s), node: s });
        }
    }
    while let Some(Entry { node: u, .. }) = queue.pop() {
        if tree.settled[u] {
            continue;
        }
        tree.settled[u] = true;
        tree.order.push(u);
        tree.stats.settled += 1;
        if is_target(u) {
            tree.reached = Some(u);
            break;
        }
        let du = tree.dist[u];
        g.for_each_arc(u, du, allowed, |arc| {
            tree.stats.relaxed += 1;
            let alt = du + arc.weight;
            if alt < tree.dist[arc.to] {
                // Only an inconsistent heuristic can improve a settled node; reopen it.
                tree.settled[arc.to] = false;
                tree.dist[arc.to] = alt;
                tree.pred[arc.to] = u as u32;
                tree.pred_arc[arc.to] = (arc.weight, arc.mode);
                queue.push(Entry { key: alt + heuristic(arc.to), node: arc.to });
            }
        });
    }
    Ok(tree)
}

/// One-to-one Dijkstra. Stops as soon as `t` is settled.
pub fn dijkstra<G: Network + ?Sized>(
    g: &G,
    s: usize,
    t: usize,
    allowed: ModeSet,
) -> Result<(Option<Path>, SearchStats), RouteError> {
    a_star(g, s, t, allowed, |_| 0.0)
}

/// One-to-all Dijkstra.
pub fn dijkstra_all<G: Network + ?Sized>(g: &G, s: usize, allowed: ModeSet) -> Result<SearchTree, RouteError> {
    search(g, &[(s, 0.0)], allowed, |_| 0.0, |_| false)
}

/// A* towards `t` with heuristic `h(u)`, an estimate of the cost from `u` to `t`.
pub fn a_star<G, H>(g: &G, s: usize, t: usize, allowed: ModeSet, h: H) -> Result<(Option<Path>, SearchStats), RouteError>
where
    G: Network + ?Sized,
    H: Fn(usize) -> f64,
{
    check_node(g, t)?;
    let tree = search(g, &[(s, 0.0)], allowed, h, |u| u == t)?;
    Ok((tree.path_to(t), tree.stats))
}

/// Cheapest path from any of `sources` to `t`; all sources start at cost 0.
pub fn many_to_one<G: Network + ?Sized>(
    g: &G,
    sources: &[usize],
    t: usize,
    allowed: ModeSet,
) -> Result<(Option<Path>, SearchStats), RouteError> {
    check_node(g, t)?;
    let seeds: Vec<(usize, f64)> = sources.iter().map(|&s| (s, 0.0)).collect();
    let tree = search(g, &seeds, allowed, |_| 0.0, |u| u == t)?;
    Ok((tree.path_to(t), tree.stats))
}

/// Travel time in seconds for the straight line between `a` and `b` at `top_speed_kmh`.
pub fn crow_flies_bound(a: &GeoPoint, b: &GeoPoint, top_speed_kmh: f64) -> f64 {
    a.distance(b) / kmh_to_mps(top_speed_kmh)
}

/// The crow-flies heuristic towards `t`, assuming the fastest speed of any
/// edge and mode in `road`.
pub fn crow_flies_heuristic(road: &RoadGraph, t: usize) -> impl Fn(usize) -> f64 + '_ {
    let top = road.max_speed_kmh();
    let target = road.node(t).point;
    move |u| if top > 0.0 { crow_flies_bound(&road.node(u).point, &target, top) } else { 0.0 }
}

/// Distances from and to a set of landmarks, for the ALT heuristic.
#[derive(Debug, Clone)]
pub struct LandmarkTable {
    landmarks: Vec<usize>,
    /// `from[i][v]` = dist(landmark i, v)
    from: Vec<Vec<f64>>,
    /// `to[i][v]` = dist(v, landmark i)
    to: Vec<Vec<f64>>,
}

/// Default number of landmarks.
pub const DEFAULT_LANDMARKS: usize = 24;

impl LandmarkTable {
    /// Chooses `count` distinct landmarks uniformly at random. Asking for more
    /// landmarks than nodes uses every node.
    pub fn precompute<G: Reversible + ?Sized>(g: &G, count: usize, seed: u64) -> Self {
        let n = g.node_count();
        let count = if count > n {
            log::warn!("{count} landmarks requested but graph has {n} nodes, using all nodes");
            n
        } else {
            count
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chosen = sample(&mut rng, n, count).into_vec();
        Self::with_landmarks(g, &chosen)
    }

    /// Precomputes distances with every mode allowed.
    pub fn with_landmarks<G: Reversible + ?Sized>(g: &G, landmarks: &[usize]) -> Self {
        let mut from = Vec::with_capacity(landmarks.len());
        let mut to = Vec::with_capacity(landmarks.len());
        for &l in landmarks {
            from.push(dijkstra_all(g, l, ModeSet::ALL).expect("landmark in graph").dist);
            to.push(dijkstra_all(&reverse_view(g), l, ModeSet::ALL).expect("landmark in graph").dist);
        }
        LandmarkTable { landmarks: landmarks.to_vec(), from, to }
    }

    pub fn landmarks(&self) -> &[usize] {
        &self.landmarks
    }

    pub fn dist_from(&self, i: usize) -> &[f64] {
        &self.from[i]
    }

    pub fn dist_to(&self, i: usize) -> &[f64] {
        &self.to[i]
    }

    /// Lower bound on dist(u, v) from the triangle inequality over all
    /// landmarks. Infinite when some landmark proves `v` unreachable from `u`:
    /// `v` reaches a landmark that `u` cannot, or a landmark reaches `u` but not `v`.
    /// Terms with other unreachable entries are skipped.
    pub fn heuristic(&self, u: usize, v: usize) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.landmarks.len() {
            let (tu, tv) = (self.to[i][u], self.to[i][v]);
            if tv.is_finite() {
                if tu.is_infinite() {
                    return f64::INFINITY;
                }
                best = best.max(tu - tv);
            }
            let (fu, fv) = (self.from[i][u], self.from[i][v]);
            if fu.is_finite() {
                if fv.is_infinite() {
                    return f64::INFINITY;
                }
                best = best.max(fv - fu);
            }
        }
        best
    }
}

/// Earliest arrival from stop `s` to stop `t` on a time-expanded transit graph,
/// departing at `tau`.
///
/// The search starts at every departure node of `s` leaving no earlier than
/// `tau` plus the transfer duration, at cost `time - tau`, and stops at the
/// first arrival node of `t`. Returns that node's time plus the transfer
/// duration, which makes the result comparable to a connection scan whose
/// footpaths are self-loops of the same duration.
pub fn transit_earliest_arrival(
    tg: &TransitGraph,
    s: usize,
    t: usize,
    tau: Seconds,
) -> Result<(Option<Seconds>, SearchStats), RouteError> {
    for stop in [s, t] {
        if stop >= tg.stop_count() {
            return Err(RouteError::InvalidNode { node: stop, count: tg.stop_count() });
        }
    }
    let d = tg.transfer_duration();
    if s == t {
        return Ok((Some(tau + d), SearchStats::default()));
    }
    let earliest = tau as u64 + d as u64;
    let sources: Vec<(usize, f64)> = tg
        .events_at(s, EventKind::Departure)
        .into_iter()
        .filter(|&v| tg.node(v).time as u64 >= earliest)
        .map(|v| (v, (tg.node(v).time - tau) as f64))
        .collect();
    if sources.is_empty() {
        return Ok((None, SearchStats::default()));
    }
    let is_target = |v: usize| {
        let n = tg.node(v);
        n.stop as usize == t && n.event == EventKind::Arrival
    };
    let tree = search(tg, &sources, ModeSet::ALL, |_| 0.0, is_target)?;
    Ok((tree.reached().map(|v| tg.node(v).time + d), tree.stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;

    fn fig_5_1() -> Digraph {
        Digraph::from_edges(5, &[(0, 8.0, 1), (0, 1.0, 2), (2, 2.0, 3), (3, 1.0, 1), (3, 4.0, 4), (1, 2.0, 4)]).unwrap()
    }

    #[test]
    fn landmarks_prove_unreachability() {
        // 0 -> 1 -> 2, and 3 -> 2. Node 3 is unreachable from 0.
        let g = Digraph::from_edges(4, &[(0, 1.0, 1), (1, 1.0, 2), (3, 1.0, 2)]).unwrap();
        let lm = LandmarkTable::with_landmarks(&g, &[0]);
        assert_eq!(lm.heuristic(0, 3), f64::INFINITY);
        assert_eq!(lm.heuristic(0, 2), 2.0);
        let lm = LandmarkTable::with_landmarks(&g, &[2]);
        assert_eq!(lm.heuristic(0, 2), 2.0);
        assert_eq!(lm.heuristic(3, 0), 0.0);
    }

    #[test]
    fn trace_example() {
        let g = fig_5_1();
        let (p, _) = dijkstra(&g, 0, 4, ModeSet::ALL).unwrap();
        let p = p.unwrap();
        assert_eq!(p.cost, 6.0);
        assert_eq!(p.triples(), vec![(0, 1.0, 2), (2, 2.0, 3), (3, 1.0, 1), (1, 2.0, 4)]);
        let tree = dijkstra_all(&g, 0, ModeSet::ALL).unwrap();
        assert_eq!(tree.distances(), &[0.0, 4.0, 1.0, 3.0, 6.0]);
        assert_eq!(tree.order(), &[0, 2, 3, 1, 4]);
    }

    #[test]
    fn source_is_target() {
        let g = fig_5_1();
        let (p, _) = dijkstra(&g, 3, 3, ModeSet::ALL).unwrap();
        let p = p.unwrap();
        assert!(p.is_empty());
        assert_eq!(p.cost, 0.0);
        assert_eq!(p.dest(), 3);
    }

    #[test]
    fn unknown_node() {
        let g = fig_5_1();
        assert_eq!(dijkstra(&g, 9, 0, ModeSet::ALL).unwrap_err(), RouteError::InvalidNode { node: 9, count: 5 });
        assert!(dijkstra(&g, 4, 0, ModeSet::ALL).unwrap().0.is_none());
    }

    #[test]
    fn many_sources() {
        let g = fig_5_1();
        let (p, _) = many_to_one(&g, &[1, 2], 4, ModeSet::ALL).unwrap();
        let p = p.unwrap();
        assert_eq!(p.cost, 2.0);
        assert_eq!(p.src(), 1);
    }

    #[test]
    fn zero_heuristic_settles_like_dijkstra() {
        let g = fig_5_1();
        let (_, a) = dijkstra(&g, 0, 4, ModeSet::ALL).unwrap();
        let (_, b) = a_star(&g, 0, 4, ModeSet::ALL, |_| 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_landmark_row_is_a_dijkstra_run() {
        let g = fig_5_1();
        let t = LandmarkTable::with_landmarks(&g, &[0]);
        assert_eq!(t.dist_from(0), &[0.0, 4.0, 1.0, 3.0, 6.0]);
        assert_eq!(t.heuristic(2, 2), 0.0);
    }

    #[test]
    fn all_nodes_as_landmarks_is_exact() {
        let g = fig_5_1();
        let t = LandmarkTable::precompute(&g, 99, 1);
        assert_eq!(t.landmarks().len(), 5);
        for u in 0..5 {
            let tree = dijkstra_all(&g, u, ModeSet::ALL).unwrap();
            for v in 0..5 {
                if let Some(d) = tree.dist(v) {
                    assert_eq!(t.heuristic(u, v), d, "{u} -> {v}");
                }
            }
        }
    }
}
