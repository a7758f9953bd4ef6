//! Geographic lookup of items by location, on top of a cover tree.
//!
//! The tree keeps one representative per coordinate, so items sharing a
//! location are grouped behind it.

use crate::cover_tree::{CoverTree, CrowFlies};
use crate::geo::GeoPoint;

#[derive(Debug, Clone)]
pub struct PointIndex {
    tree: CoverTree<GeoPoint, CrowFlies>,
    /// Items located at each tree point, ascending.
    members: Vec<Vec<u32>>,
}

/// An item found by a query, with its distance in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub item: usize,
    pub distance: f64,
}

impl PointIndex {
    /// Indexes `points[i]` as item `i`.
    pub fn build<I: IntoIterator<Item = GeoPoint>>(points: I) -> Self {
        let (tree, reps) = CoverTree::build(CrowFlies, points);
        let mut members = vec![Vec::new(); tree.len()];
        for (item, rep) in reps.into_iter().enumerate() {
            members[rep].push(item as u32);
        }
        PointIndex { tree, members }
    }

    pub fn len(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn tree(&self) -> &CoverTree<GeoPoint, CrowFlies> {
        &self.tree
    }

    /// The item closest to `p`; an item exactly at `p` qualifies. Among
    /// co-located items the smallest index wins.
    pub fn closest(&self, p: &GeoPoint) -> Option<Hit> {
        let n = self.tree.closest(p).ok()?;
        Some(Hit { item: self.members[n.index][0] as usize, distance: n.distance })
    }

    /// Up to `k` items closest to `p`, ascending by distance.
    pub fn k_closest(&self, p: &GeoPoint, k: usize) -> Vec<Hit> {
        let Ok(found) = self.tree.k_closest(p, k) else {
            return Vec::new();
        };
        let mut out: Vec<Hit> = found
            .into_iter()
            .flat_map(|n| self.members[n.index].iter().map(move |&item| Hit { item: item as usize, distance: n.distance }))
            .collect();
        out.truncate(k);
        out
    }

    /// All items within `r` meters of `p`, including items exactly at `p`.
    pub fn within(&self, p: &GeoPoint, r: f64) -> Vec<Hit> {
        let mut reps: Vec<(usize, f64)> = match self.tree.neighborhood(p, r) {
            Ok(found) => found.into_iter().map(|n| (n.index, n.distance)).collect(),
            Err(_) => return Vec::new(),
        };
        if let Ok(n) = self.tree.closest(p) {
            if n.distance == 0.0 {
                reps.push((n.index, 0.0));
            }
        }
        reps.into_iter()
            .flat_map(|(rep, d)| self.members[rep].iter().map(move |&item| Hit { item: item as usize, distance: d }))
            .collect()
    }
}
