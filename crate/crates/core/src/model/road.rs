use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{ModeSet, ModelError, TransportMode};
use crate::geo::GeoPoint;
use crate::graph::{Arc, Network, Reversible};

#[inline]
pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadNode {
    /// External (OSM) identifier.
    pub id: i64,
    pub point: GeoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub src: u32,
    pub dst: u32,
    /// Length in meters.
    pub distance: f64,
    pub modes: ModeSet,
    /// km/h per mode, indexed by [`TransportMode::index`]; zero for modes not in `modes`.
    speeds: [f64; 4],
    /// Index into [`RoadGraph::name`].
    pub name: Option<u32>,
}

impl RoadEdge {
    pub fn speed(&self, mode: TransportMode) -> Option<f64> {
        self.modes.contains(mode).then(|| self.speeds[mode.index()])
    }

    /// Travel time in seconds with the fastest mode usable under `allowed`,
    /// together with that mode. `None` when no mode of the edge is allowed.
    #[inline]
    pub fn weight(&self, allowed: ModeSet) -> Option<(f64, TransportMode)> {
        let mode = self.modes.intersection(allowed).fastest()?;
        Some((self.distance / kmh_to_mps(self.speeds[mode.index()]), mode))
    }
}

/// Seconds needed to traverse `e` with the fastest usable mode, or `None` if
/// no mode of `e` is allowed.
pub fn edge_weight(e: &RoadEdge, allowed: ModeSet) -> Option<f64> {
    e.weight(allowed).map(|(w, _)| w)
}

/// A multi-modal road graph in forward and backward adjacency-array form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoadGraph {
    nodes: Vec<RoadNode>,
    /// Sorted by source node.
    edges: Vec<RoadEdge>,
    first_out: Vec<u32>,
    first_in: Vec<u32>,
    /// Edge indices sorted by destination node.
    in_edges: Vec<u32>,
    names: Vec<String>,
    #[serde(skip)]
    id_index: HashMap<i64, u32>,
}

impl RoadGraph {
    pub fn empty() -> Self {
        RoadGraphBuilder::new().build()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[RoadNode] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &RoadNode {
        &self.nodes[index]
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn out_edges(&self, u: usize) -> &[RoadEdge] {
        &self.edges[self.first_out[u] as usize..self.first_out[u + 1] as usize]
    }

    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = &RoadEdge> + '_ {
        self.in_edges[self.first_in[v] as usize..self.first_in[v + 1] as usize]
            .iter()
            .map(|&i| &self.edges[i as usize])
    }

    /// Index of the node with the given external id.
    pub fn index_of(&self, id: i64) -> Option<usize> {
        self.id_index.get(&id).map(|&i| i as usize)
    }

    pub fn name(&self, name: u32) -> &str {
        &self.names[name as usize]
    }

    /// Highest speed of any mode on any edge, in km/h. Zero for edgeless graphs.
    pub fn max_speed_kmh(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|e| e.modes.iter().map(move |m| e.speeds[m.index()]))
            .fold(0.0, f64::max)
    }

    pub fn in_degree(&self, v: usize) -> usize {
        (self.first_in[v + 1] - self.first_in[v]) as usize
    }

    pub fn out_degree(&self, u: usize) -> usize {
        (self.first_out[u + 1] - self.first_out[u]) as usize
    }

    /// Rebuilds lookup tables that are not serialized.
    pub(crate) fn reindex(&mut self) {
        self.id_index = self.nodes.iter().enumerate().map(|(i, n)| (n.id, i as u32)).collect();
    }
}

impl Network for RoadGraph {
    fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    fn for_each_arc<F: FnMut(Arc)>(&self, u: usize, _elapsed: f64, allowed: ModeSet, mut f: F) {
        for e in self.out_edges(u) {
            if let Some((weight, mode)) = e.weight(allowed) {
                f(Arc { to: e.dst as usize, weight, mode: Some(mode) });
            }
        }
    }
}

impl Reversible for RoadGraph {
    fn for_each_reverse_arc<F: FnMut(Arc)>(&self, v: usize, allowed: ModeSet, mut f: F) {
        for e in self.in_edges(v) {
            if let Some((weight, mode)) = e.weight(allowed) {
                f(Arc { to: e.src as usize, weight, mode: Some(mode) });
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct RoadGraphBuilder {
    nodes: Vec<RoadNode>,
    edges: Vec<RoadEdge>,
    id_index: HashMap<i64, u32>,
    names: Vec<String>,
    name_index: HashMap<String, u32>,
}

impl RoadGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn add_node(&mut self, id: i64, point: GeoPoint) -> Result<usize, ModelError> {
        if self.id_index.contains_key(&id) {
            return Err(ModelError::DuplicateNode(id));
        }
        let index = self.nodes.len();
        self.id_index.insert(id, index as u32);
        self.nodes.push(RoadNode { id, point });
        Ok(index)
    }

    pub fn index_of(&self, id: i64) -> Option<usize> {
        self.id_index.get(&id).map(|&i| i as usize)
    }

    pub fn point(&self, index: usize) -> GeoPoint {
        self.nodes[index].point
    }

    /// Adds an edge with explicit per-mode speeds in km/h.
    pub fn add_edge(
        &mut self,
        src: usize,
        dst: usize,
        distance: f64,
        speeds: &[(TransportMode, f64)],
        name: Option<&str>,
    ) -> Result<(), ModelError> {
        for node in [src, dst] {
            if node >= self.nodes.len() {
                return Err(ModelError::UnknownNode(node));
            }
        }
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(ModelError::InvalidDistance { src, dst, distance });
        }
        if speeds.is_empty() {
            return Err(ModelError::NoModes { src, dst });
        }
        let mut modes = ModeSet::EMPTY;
        let mut table = [0.0; 4];
        for &(mode, speed) in speeds {
            if !(speed > 0.0 && speed.is_finite()) {
                return Err(ModelError::InvalidSpeed { src, dst, mode, speed });
            }
            modes.insert(mode);
            table[mode.index()] = speed;
        }
        let name = name.map(|n| match self.name_index.get(n) {
            Some(&i) => i,
            None => {
                let i = self.names.len() as u32;
                self.names.push(n.to_string());
                self.name_index.insert(n.to_string(), i);
                i
            }
        });
        self.edges.push(RoadEdge { src: src as u32, dst: dst as u32, distance, modes, speeds: table, name });
        Ok(())
    }

    /// Adds an edge whose length is the crow-flies distance between its endpoints.
    pub fn add_road(
        &mut self,
        src: usize,
        dst: usize,
        speeds: &[(TransportMode, f64)],
        name: Option<&str>,
    ) -> Result<(), ModelError> {
        if src >= self.nodes.len() || dst >= self.nodes.len() {
            return Err(ModelError::UnknownNode(src.max(dst)));
        }
        let d = self.nodes[src].point.distance(&self.nodes[dst].point);
        self.add_edge(src, dst, d, speeds, name)
    }

    pub fn build(self) -> RoadGraph {
        let n = self.nodes.len();
        let mut edges = self.edges;
        edges.sort_by_key(|e| e.src);
        let mut first_out = vec![0u32; n + 1];
        let mut first_in = vec![0u32; n + 1];
        for e in &edges {
            first_out[e.src as usize + 1] += 1;
            first_in[e.dst as usize + 1] += 1;
        }
        for i in 0..n {
            first_out[i + 1] += first_out[i];
            first_in[i + 1] += first_in[i];
        }
        let mut in_edges: Vec<u32> = (0..edges.len() as u32).collect();
        in_edges.sort_by_key(|&i| edges[i as usize].dst);
        RoadGraph { nodes: self.nodes, edges, first_out, first_in, in_edges, names: self.names, id_index: self.id_index }
    }
}
