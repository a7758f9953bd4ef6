//! The directed-graph surface the search algorithms run on.
//!
//! Arc weights are computed on demand: a road edge's cost depends on the
//! allowed mode set, and a link edge into the transit network depends on the
//! time already spent. [`Network::for_each_arc`] therefore receives both.

use thiserror::Error;

use crate::model::{ModeSet, TransportMode};

/// A usable outgoing arc as seen by a search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub to: usize,
    pub weight: f64,
    /// Mode the arc is traversed with, when it has one.
    pub mode: Option<TransportMode>,
}

pub trait Network {
    fn node_count(&self) -> usize;

    /// Calls `f` for every arc leaving `u` that is usable under `allowed`.
    /// `elapsed` is the cost accumulated when `u` is settled; time-independent
    /// networks ignore it.
    fn for_each_arc<F: FnMut(Arc)>(&self, u: usize, elapsed: f64, allowed: ModeSet, f: F);
}

/// Networks whose incoming arcs can be enumerated, enabling [`Reversed`].
pub trait Reversible: Network {
    /// Calls `f` for every arc `(u, w, v)` entering `v`, reported as `Arc { to: u, .. }`.
    fn for_each_reverse_arc<F: FnMut(Arc)>(&self, v: usize, allowed: ModeSet, f: F);
}

/// Implicit reversal: `(u, w, v)` is seen as `(v, w, u)`. Nothing is copied.
#[derive(Debug, Clone, Copy)]
pub struct Reversed<'a, G: ?Sized>(pub &'a G);

pub fn reverse_view<G: Reversible + ?Sized>(g: &G) -> Reversed<'_, G> {
    Reversed(g)
}

impl<G: Reversible + ?Sized> Network for Reversed<'_, G> {
    fn node_count(&self) -> usize {
        self.0.node_count()
    }

    fn for_each_arc<F: FnMut(Arc)>(&self, u: usize, _elapsed: f64, allowed: ModeSet, f: F) {
        self.0.for_each_reverse_arc(u, allowed, f)
    }
}

impl<G: Reversible + ?Sized> Reversible for Reversed<'_, G> {
    fn for_each_reverse_arc<F: FnMut(Arc)>(&self, v: usize, allowed: ModeSet, f: F) {
        self.0.for_each_arc(v, 0.0, allowed, f)
    }
}

/// All arcs of a time-independent network as `(src, weight, dst)`, sorted.
pub fn arc_list<G: Network>(g: &G, allowed: ModeSet) -> Vec<(usize, f64, usize)> {
    let mut out = Vec::new();
    for u in 0..g.node_count() {
        g.for_each_arc(u, 0.0, allowed, |a| out.push((u, a.weight, a.to)));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.cmp(&b.2)).then(a.1.total_cmp(&b.1)));
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge ({src}, {weight}, {dst}) has an invalid weight")]
    InvalidWeight { src: usize, weight: f64, dst: usize },
    #[error("edge references node {node}, graph has {count} nodes")]
    UnknownNode { node: usize, count: usize },
}

/// A plain weighted digraph with fixed, mode-independent weights.
#[derive(Debug, Clone)]
pub struct Digraph {
    first_out: Vec<usize>,
    heads: Vec<usize>,
    weights: Vec<f64>,
    first_in: Vec<usize>,
    tails: Vec<usize>,
    in_weights: Vec<f64>,
}

impl Digraph {
    /// Builds the graph from `(src, weight, dst)` triples. Negative or
    /// non-finite weights are rejected.
    pub fn from_edges(node_count: usize, edges: &[(usize, f64, usize)]) -> Result<Self, GraphError> {
        for &(src, weight, dst) in edges {
            for node in [src, dst] {
                if node >= node_count {
                    return Err(GraphError::UnknownNode { node, count: node_count });
                }
            }
            if !(weight >= 0.0 && weight.is_finite()) {
                return Err(GraphError::InvalidWeight { src, weight, dst });
            }
        }
        let (first_out, heads, weights) = csr(node_count, edges.iter().map(|&(s, w, d)| (s, w, d)));
        let (first_in, tails, in_weights) = csr(node_count, edges.iter().map(|&(s, w, d)| (d, w, s)));
        Ok(Digraph { first_out, heads, weights, first_in, tails, in_weights })
    }

    pub fn edge_count(&self) -> usize {
        self.heads.len()
    }

    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.first_out[u]..self.first_out[u + 1];
        self.heads[range.clone()].iter().copied().zip(self.weights[range].iter().copied())
    }
}

fn csr(n: usize, edges: impl Iterator<Item = (usize, f64, usize)>) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let mut edges: Vec<_> = edges.collect();
    edges.sort_by_key(|e| e.0);
    let mut first = vec![0; n + 1];
    for e in &edges {
        first[e.0 + 1] += 1;
    }
    for i in 0..n {
        first[i + 1] += first[i];
    }
    let heads = edges.iter().map(|e| e.2).collect();
    let weights = edges.iter().map(|e| e.1).collect();
    (first, heads, weights)
}

impl Network for Digraph {
    fn node_count(&self) -> usize {
        self.first_out.len() - 1
    }

    fn for_each_arc<F: FnMut(Arc)>(&self, u: usize, _elapsed: f64, _allowed: ModeSet, mut f: F) {
        for i in self.first_out[u]..self.first_out[u + 1] {
            f(Arc { to: self.heads[i], weight: self.weights[i], mode: None });
        }
    }
}

impl Reversible for Digraph {
    fn for_each_reverse_arc<F: FnMut(Arc)>(&self, v: usize, _allowed: ModeSet, mut f: F) {
        for i in self.first_in[v]..self.first_in[v + 1] {
            f(Arc { to: self.tails[i], weight: self.in_weights[i], mode: None });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_2_1() -> Digraph {
        // v1..v5 as 0..4
        Digraph::from_edges(5, &[(0, 8.0, 1), (0, 1.0, 2), (1, 1.0, 0), (1, 2.0, 4), (2, 2.0, 3), (3, 1.0, 1)]).unwrap()
    }

    #[test]
    fn reverse_flips_every_edge() {
        let g = fig_2_1();
        let rev = arc_list(&reverse_view(&g), ModeSet::ALL);
        assert_eq!(rev.len(), 6);
        assert!(rev.contains(&(1, 8.0, 0)));
        assert!(rev.contains(&(4, 2.0, 1)));
        assert!(!rev.contains(&(0, 8.0, 1)));
    }

    #[test]
    fn reverse_is_an_involution() {
        let g = fig_2_1();
        let rr = Reversed(&Reversed(&g));
        assert_eq!(arc_list(&rr, ModeSet::ALL), arc_list(&g, ModeSet::ALL));
    }

    #[test]
    fn empty_graph_reverses_to_empty() {
        let g = Digraph::from_edges(0, &[]).unwrap();
        assert!(arc_list(&reverse_view(&g), ModeSet::ALL).is_empty());
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(matches!(Digraph::from_edges(2, &[(0, -1.0, 1)]), Err(GraphError::InvalidWeight { .. })));
        assert!(matches!(Digraph::from_edges(2, &[(0, 1.0, 2)]), Err(GraphError::UnknownNode { .. })));
    }
}
