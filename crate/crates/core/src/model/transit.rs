use serde::{Deserialize, Serialize};

use super::{ModeSet, Seconds, TransportMode};
use crate::geo::GeoPoint;
use crate::graph::{Arc, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Arrival,
    Departure,
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitNode {
    pub stop: u32,
    pub point: GeoPoint,
    pub time: Seconds,
    pub event: EventKind,
    /// Trip of arrival and departure events.
    pub trip: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransitEdgeKind {
    /// departure -> arrival at the next stop of the trip
    Ride,
    /// arrival -> departure of the same trip at the same stop
    Stay,
    /// arrival -> its transfer node, weighted with the transfer duration
    Alight,
    /// transfer -> next transfer node at the same stop
    Wait,
    /// transfer -> departure
    Board,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitEdge {
    pub src: u32,
    pub dst: u32,
    pub weight: Seconds,
    pub kind: TransitEdgeKind,
}

/// One stop of a trip, in stop-sequence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TripEvent {
    pub stop: u32,
    pub arrival: Seconds,
    pub departure: Seconds,
}

/// A realistic time-expanded transit graph.
///
/// A trip's first stop only yields a departure node and its last stop only an
/// arrival node; every stop in between yields both, joined by a stay edge.
/// Every arrival node owns a transfer node `transfer_duration` later. Transfer
/// nodes of one stop form a waiting chain in ascending time order, and every
/// departure node is boarded from the latest transfer node not after it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitGraph {
    nodes: Vec<TransitNode>,
    edges: Vec<TransitEdge>,
    first_out: Vec<u32>,
    transfer_duration: Seconds,
    stop_points: Vec<GeoPoint>,
    /// Node ids grouped by stop, ascending by (time, id) within a stop.
    first_at_stop: Vec<u32>,
    at_stop: Vec<u32>,
}

impl TransitGraph {
    pub fn empty(transfer_duration: Seconds) -> Self {
        TransitGraph::build(Vec::new(), &[], transfer_duration)
    }

    /// Builds the graph from the stop locations and each trip's events.
    /// `trips` pairs a trip index with its events; trips with fewer than two
    /// events contribute nothing. Event times are expected to be non-decreasing
    /// along a trip.
    pub fn build(stop_points: Vec<GeoPoint>, trips: &[(u32, Vec<TripEvent>)], transfer_duration: Seconds) -> Self {
        let mut nodes: Vec<TransitNode> = Vec::new();
        let mut edges: Vec<TransitEdge> = Vec::new();
        let push = |nodes: &mut Vec<TransitNode>, stop: u32, time, event, trip| {
            nodes.push(TransitNode { stop, point: stop_points[stop as usize], time, event, trip });
            (nodes.len() - 1) as u32
        };

        for (trip, events) in trips {
            if events.len() < 2 {
                continue;
            }
            let last = events.len() - 1;
            let mut prev_departure: Option<u32> = None;
            for (i, ev) in events.iter().enumerate() {
                let departure_time = ev.departure.max(ev.arrival);
                let arrival = (i > 0).then(|| push(&mut nodes, ev.stop, ev.arrival, EventKind::Arrival, Some(*trip)));
                let departure =
                    (i < last).then(|| push(&mut nodes, ev.stop, departure_time, EventKind::Departure, Some(*trip)));
                if let (Some(dep), Some(arr)) = (prev_departure, arrival) {
                    let weight = nodes[arr as usize].time.saturating_sub(nodes[dep as usize].time);
                    edges.push(TransitEdge { src: dep, dst: arr, weight, kind: TransitEdgeKind::Ride });
                }
                if let (Some(arr), Some(dep)) = (arrival, departure) {
                    edges.push(TransitEdge { src: arr, dst: dep, weight: departure_time - ev.arrival, kind: TransitEdgeKind::Stay });
                }
                if let Some(arr) = arrival {
                    let t = push(&mut nodes, ev.stop, ev.arrival + transfer_duration, EventKind::Transfer, None);
                    edges.push(TransitEdge { src: arr, dst: t, weight: transfer_duration, kind: TransitEdgeKind::Alight });
                }
                prev_departure = departure;
            }
        }

        // Waiting chains and boarding edges, per stop.
        let mut transfers: Vec<Vec<u32>> = vec![Vec::new(); stop_points.len()];
        let mut departures: Vec<Vec<u32>> = vec![Vec::new(); stop_points.len()];
        for (i, n) in nodes.iter().enumerate() {
            match n.event {
                EventKind::Transfer => transfers[n.stop as usize].push(i as u32),
                EventKind::Departure => departures[n.stop as usize].push(i as u32),
                EventKind::Arrival => {}
            }
        }
        for (chain, deps) in transfers.iter_mut().zip(&departures) {
            chain.sort_by_key(|&i| (nodes[i as usize].time, i));
            for w in chain.windows(2) {
                let weight = nodes[w[1] as usize].time - nodes[w[0] as usize].time;
                edges.push(TransitEdge { src: w[0], dst: w[1], weight, kind: TransitEdgeKind::Wait });
            }
            for &dep in deps {
                let t = nodes[dep as usize].time;
                let pos = chain.partition_point(|&i| nodes[i as usize].time <= t);
                if pos > 0 {
                    let from = chain[pos - 1];
                    let weight = t - nodes[from as usize].time;
                    edges.push(TransitEdge { src: from, dst: dep, weight, kind: TransitEdgeKind::Board });
                }
            }
        }

        Self::assemble(nodes, edges, transfer_duration, stop_points)
    }

    fn assemble(nodes: Vec<TransitNode>, mut edges: Vec<TransitEdge>, transfer_duration: Seconds, stop_points: Vec<GeoPoint>) -> Self {
        edges.sort_by_key(|e| e.src);
        let mut first_out = vec![0u32; nodes.len() + 1];
        for e in &edges {
            first_out[e.src as usize + 1] += 1;
        }
        for i in 0..nodes.len() {
            first_out[i + 1] += first_out[i];
        }
        let mut at_stop: Vec<u32> = (0..nodes.len() as u32).collect();
        at_stop.sort_by_key(|&i| (nodes[i as usize].stop, nodes[i as usize].time, i));
        let mut first_at_stop = vec![0u32; stop_points.len() + 1];
        for n in &nodes {
            first_at_stop[n.stop as usize + 1] += 1;
        }
        for i in 0..stop_points.len() {
            first_at_stop[i + 1] += first_at_stop[i];
        }
        TransitGraph { nodes, edges, first_out, transfer_duration, stop_points, first_at_stop, at_stop }
    }

    /// A copy with additional nodes and edges appended.
    pub(crate) fn extended(&self, extra_nodes: Vec<TransitNode>, extra_edges: Vec<TransitEdge>) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.extend(extra_nodes);
        let mut edges = self.edges.clone();
        edges.extend(extra_edges);
        Self::assemble(nodes, edges, self.transfer_duration, self.stop_points.clone())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[TransitNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TransitNode {
        &self.nodes[i]
    }

    pub fn edges(&self) -> &[TransitEdge] {
        &self.edges
    }

    pub fn out_edges(&self, u: usize) -> &[TransitEdge] {
        &self.edges[self.first_out[u] as usize..self.first_out[u + 1] as usize]
    }

    pub fn transfer_duration(&self) -> Seconds {
        self.transfer_duration
    }

    pub fn stop_count(&self) -> usize {
        self.stop_points.len()
    }

    pub fn stop_point(&self, stop: usize) -> GeoPoint {
        self.stop_points[stop]
    }

    /// Node indices of one event kind at a stop, ascending by time.
    pub fn events_at(&self, stop: usize, event: EventKind) -> Vec<usize> {
        self.at_stop[self.first_at_stop[stop] as usize..self.first_at_stop[stop + 1] as usize]
            .iter()
            .map(|&i| i as usize)
            .filter(|&i| self.nodes[i].event == event)
            .collect()
    }

    /// Checks the structural invariants and returns a description of each violation.
    pub fn audit(&self) -> Vec<String> {
        use EventKind::*;
        use TransitEdgeKind::*;
        let mut problems = Vec::new();
        for e in &self.edges {
            let (u, v) = (&self.nodes[e.src as usize], &self.nodes[e.dst as usize]);
            if v.time < u.time || e.weight != v.time - u.time {
                problems.push(format!("edge {}->{} weight {} != {} - {}", e.src, e.dst, e.weight, v.time, u.time));
            }
            let pattern_ok = match e.kind {
                Ride => u.event == Departure && v.event == Arrival && u.trip == v.trip,
                Stay => u.event == Arrival && v.event == Departure && u.trip == v.trip && u.stop == v.stop,
                Alight => u.event == Arrival && v.event == Transfer && u.stop == v.stop && e.weight == self.transfer_duration,
                Wait => u.event == Transfer && v.event == Transfer && u.stop == v.stop,
                Board => u.event == Transfer && v.event == Departure && u.stop == v.stop,
            };
            if !pattern_ok {
                problems.push(format!("edge {}->{} of kind {:?} joins {:?} and {:?}", e.src, e.dst, e.kind, u.event, v.event));
            }
        }
        // Leading arrival nodes added for linking have no incoming ride and no transfer node.
        let mut ridden = vec![false; self.nodes.len()];
        for e in &self.edges {
            if e.kind == Ride {
                ridden[e.dst as usize] = true;
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.event == Arrival
                && ridden[i]
                && !self.out_edges(i).iter().any(|e| {
                    e.kind == Alight && self.nodes[e.dst as usize].time == n.time + self.transfer_duration
                })
            {
                problems.push(format!("arrival node {i} has no transfer node"));
            }
        }
        for stop in 0..self.stop_points.len() {
            let chain = self.events_at(stop, Transfer);
            for w in chain.windows(2) {
                if !self.out_edges(w[0]).iter().any(|e| e.kind == Wait && e.dst as usize == w[1]) {
                    problems.push(format!("transfer nodes {} and {} not chained", w[0], w[1]));
                }
            }
            for dep in self.events_at(stop, Departure) {
                let t = self.nodes[dep].time;
                let latest = chain.iter().rev().find(|&&c| self.nodes[c].time <= t);
                let boards: Vec<usize> = self
                    .edges
                    .iter()
                    .filter(|e| e.kind == Board && e.dst as usize == dep)
                    .map(|e| e.src as usize)
                    .collect();
                match latest {
                    Some(&c) if boards != [c] => problems.push(format!("departure {dep} boarded from {boards:?}, expected {c}")),
                    None if !boards.is_empty() => problems.push(format!("departure {dep} boarded without earlier transfer node")),
                    _ => {}
                }
            }
        }
        problems
    }
}

impl Network for TransitGraph {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn for_each_arc<F: FnMut(Arc)>(&self, u: usize, _elapsed: f64, allowed: ModeSet, mut f: F) {
        if !allowed.contains(TransportMode::Tram) {
            return;
        }
        for e in self.out_edges(u) {
            f(Arc { to: e.dst as usize, weight: e.weight as f64, mode: Some(TransportMode::Tram) });
        }
    }
}
