//! A cover tree over an arbitrary metric space.
//!
//! Levels are powers of two. A point that is present at level `i` is implicitly
//! present at every lower level down to the minimum level (nesting), so each
//! stored point only records its highest level and its explicit children,
//! grouped by the level they hang at. The self-child chain is never
//! materialized.
//!
//! Invariants kept after every insertion, for every represented level `i`:
//!
//! * every point occurs at most once in the cover `C_i`;
//! * `C_i` is contained in `C_{i-1}`;
//! * every point of `C_{i-1}` has a parent in `C_i` at distance `<= 2^i`;
//! * distinct points of `C_i` are more than `2^i` apart.
//!
//! The tree stores one representative per metric location. Inserting a point
//! at distance zero from a stored one is rejected with
//! [`CoverTreeError::Duplicate`], which carries the index of the stored
//! representative so callers can keep their own index -> payload mapping.

use std::collections::HashSet;

use thiserror::Error;

use crate::geo::{as_the_crow_flies, GeoPoint};

pub trait Metric<P> {
    fn distance(&self, a: &P, b: &P) -> f64;
}

impl<P, F> Metric<P> for F
where
    F: Fn(&P, &P) -> f64,
{
    fn distance(&self, a: &P, b: &P) -> f64 {
        self(a, b)
    }
}

/// Euclidean distance on fixed-size coordinate arrays.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl<const N: usize> Metric<[f64; N]> for Euclidean {
    fn distance(&self, a: &[f64; N], b: &[f64; N]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }
}

/// Equirectangular distance in meters on geographic points.
#[derive(Debug, Clone, Copy, Default)]
pub struct CrowFlies;

impl Metric<GeoPoint> for CrowFlies {
    fn distance(&self, a: &GeoPoint, b: &GeoPoint) -> f64 {
        as_the_crow_flies(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CoverTreeError {
    #[error("point coincides with stored point #{existing}")]
    Duplicate { existing: usize },
    #[error("cover tree holds no candidate point")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cover tree invariant violated: {0}")]
pub struct InvariantViolation(pub String);

/// A query answer: index of the stored point and its distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct CoverTree<P, M = Euclidean> {
    metric: M,
    points: Vec<P>,
    /// Highest level at which each point appears.
    top: Vec<i32>,
    /// Explicit children per point, grouped by child level, highest level first.
    children: Vec<Vec<(i32, Vec<usize>)>>,
    root: Option<usize>,
    max_level: i32,
    min_level: i32,
}

#[inline]
fn radius(level: i32) -> f64 {
    2f64.powi(level)
}

impl<P, M: Metric<P>> CoverTree<P, M> {
    pub fn new(metric: M) -> Self {
        CoverTree {
            metric,
            points: Vec::new(),
            top: Vec::new(),
            children: Vec::new(),
            root: None,
            max_level: 0,
            min_level: 0,
        }
    }

    /// Builds a tree from an iterator, skipping points that duplicate an earlier one.
    /// Returns the tree together with, for each input point, the index of its representative.
    pub fn build<I: IntoIterator<Item = P>>(metric: M, points: I) -> (Self, Vec<usize>) {
        let mut tree = CoverTree::new(metric);
        let reps = points
            .into_iter()
            .map(|p| match tree.insert(p) {
                Ok(i) => i,
                Err(CoverTreeError::Duplicate { existing }) => existing,
                Err(CoverTreeError::Empty) => unreachable!(),
            })
            .collect();
        (tree, reps)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &P {
        &self.points[index]
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn metric(&self) -> &M {
        &self.metric
    }

    pub fn max_level(&self) -> i32 {
        self.max_level
    }

    pub fn min_level(&self) -> i32 {
        self.min_level
    }

    /// Highest level of a stored point.
    pub fn level_of(&self, index: usize) -> i32 {
        self.top[index]
    }

    /// Indices of the points in the cover `C_level`. Levels above the root level
    /// only hold the root; levels below the minimum level hold every point.
    pub fn cover(&self, level: i32) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.top[i] >= level || Some(i) == self.root).collect()
    }

    fn explicit_children(&self, q: usize, level: i32) -> &[usize] {
        self.children[q]
            .iter()
            .find(|(l, _)| *l == level)
            .map(|(_, c)| c.as_slice())
            .unwrap_or(&[])
    }

    fn attach(&mut self, parent: usize, child: usize, level: i32) {
        let groups = &mut self.children[parent];
        match groups.iter().position(|(l, _)| *l <= level) {
            Some(pos) if groups[pos].0 == level => groups[pos].1.push(child),
            Some(pos) => groups.insert(pos, (level, vec![child])),
            None => groups.push((level, vec![child])),
        }
    }

    /// Inserts `p` and returns its index.
    pub fn insert(&mut self, p: P) -> Result<usize, CoverTreeError> {
        let Some(root) = self.root else {
            self.points.push(p);
            self.top.push(0);
            self.children.push(Vec::new());
            self.root = Some(0);
            self.max_level = 0;
            self.min_level = 0;
            return Ok(0);
        };

        let d_root = self.metric.distance(&p, &self.points[root]);
        if d_root == 0.0 {
            return Err(CoverTreeError::Duplicate { existing: root });
        }
        if d_root > radius(self.max_level) {
            let mut level = d_root.log2().ceil() as i32;
            while radius(level) < d_root {
                level += 1;
            }
            self.max_level = level;
            self.top[root] = level;
        }

        // Q holds every point of C_i within 2^(i+1) of p. The insertion level is one
        // below the lowest level i at which some point of C_i lies within 2^i.
        let mut level = self.max_level;
        let mut candidates = vec![(root, d_root)];
        let mut parent: Option<(usize, i32)> = None;
        loop {
            let r = radius(level);
            if let Some(&(q, _)) = candidates
                .iter()
                .filter(|(_, d)| *d <= r)
                .min_by(|a, b| a.1.total_cmp(&b.1))
            {
                parent = Some((q, level));
            }

            let mut next = Vec::new();
            for &(q, dq) in &candidates {
                if dq <= r {
                    next.push((q, dq));
                }
                for &c in self.explicit_children(q, level - 1) {
                    let dc = self.metric.distance(&p, &self.points[c]);
                    if dc == 0.0 {
                        return Err(CoverTreeError::Duplicate { existing: c });
                    }
                    if dc <= r {
                        next.push((c, dc));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            candidates = next;
            level -= 1;
        }

        let (q, parent_level) = parent.expect("root always qualifies as parent");
        let index = self.points.len();
        self.points.push(p);
        self.top.push(parent_level - 1);
        self.children.push(Vec::new());
        self.attach(q, index, parent_level - 1);
        self.min_level = self.min_level.min(parent_level - 1);
        Ok(index)
    }

    /// Level-by-level descent shared by all queries. `keep` receives the
    /// candidate distances of the next level and the radius `2^i`, and returns
    /// the pruning bound. The final candidate set of the lowest level is returned.
    fn descend<F>(&self, p: &P, mut bound: F) -> Vec<Neighbor>
    where
        F: FnMut(&[Neighbor], f64) -> f64,
    {
        let Some(root) = self.root else {
            return Vec::new();
        };
        let mut candidates = vec![Neighbor { index: root, distance: self.metric.distance(p, &self.points[root]) }];
        let mut level = self.max_level;
        while level > self.min_level {
            let mut next = Vec::with_capacity(candidates.len() * 2);
            for n in &candidates {
                next.push(*n);
                for &c in self.explicit_children(n.index, level - 1) {
                    next.push(Neighbor { index: c, distance: self.metric.distance(p, &self.points[c]) });
                }
            }
            let limit = bound(&next, radius(level));
            next.retain(|n| n.distance <= limit);
            candidates = next;
            level -= 1;
        }
        candidates
    }

    fn nearest_impl(&self, p: &P, exclude_self: bool) -> Result<Neighbor, CoverTreeError> {
        let admissible = |n: &Neighbor| !(exclude_self && n.distance == 0.0);
        let last = self.descend(p, |cands, r| {
            cands
                .iter()
                .filter(|n| admissible(n))
                .map(|n| n.distance)
                .fold(f64::INFINITY, f64::min)
                + r
        });
        last.into_iter()
            .filter(admissible)
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
            .ok_or(CoverTreeError::Empty)
    }

    /// Nearest stored point other than `p` itself.
    pub fn nearest(&self, p: &P) -> Result<Neighbor, CoverTreeError> {
        self.nearest_impl(p, true)
    }

    /// Nearest stored point, including one that coincides with `p`.
    pub fn closest(&self, p: &P) -> Result<Neighbor, CoverTreeError> {
        self.nearest_impl(p, false)
    }

    fn k_nearest_impl(&self, p: &P, k: usize, exclude_self: bool) -> Result<Vec<Neighbor>, CoverTreeError> {
        if self.is_empty() {
            return Err(CoverTreeError::Empty);
        }
        let k = k.max(1);
        let admissible = |n: &Neighbor| !(exclude_self && n.distance == 0.0);
        let mut scratch = Vec::new();
        let last = self.descend(p, |cands, r| {
            scratch.clear();
            scratch.extend(cands.iter().filter(|n| admissible(n)).map(|n| n.distance));
            if scratch.len() < k {
                return f64::INFINITY;
            }
            let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth + r
        });
        let mut out: Vec<Neighbor> = last.into_iter().filter(admissible).collect();
        out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        out.truncate(k);
        Ok(out)
    }

    /// Up to `k` stored points closest to `p`, ascending by distance, excluding `p` itself.
    pub fn k_nearest(&self, p: &P, k: usize) -> Result<Vec<Neighbor>, CoverTreeError> {
        self.k_nearest_impl(p, k, true)
    }

    /// Like [`Self::k_nearest`] but a stored point equal to `p` counts as a neighbor.
    pub fn k_closest(&self, p: &P, k: usize) -> Result<Vec<Neighbor>, CoverTreeError> {
        self.k_nearest_impl(p, k, false)
    }

    /// All stored points `y != p` with `d(p, y) <= r`, in no particular order.
    pub fn neighborhood(&self, p: &P, r: f64) -> Result<Vec<Neighbor>, CoverTreeError> {
        if self.is_empty() {
            return Err(CoverTreeError::Empty);
        }
        let r = r.max(0.0);
        let last = self.descend(p, |_, level_radius| r + level_radius);
        Ok(last.into_iter().filter(|n| n.distance > 0.0 && n.distance <= r).collect())
    }

    /// Checks every structural property level by level. Meant for tests and
    /// debugging; the separation check is quadratic in the worst case.
    pub fn audit(&self) -> Result<(), InvariantViolation> {
        let fail = |msg: String| Err(InvariantViolation(msg));
        let Some(root) = self.root else {
            return if self.points.is_empty() { Ok(()) } else { fail("points without root".into()) };
        };
        if self.top[root] != self.max_level {
            return fail(format!("root level {} != max level {}", self.top[root], self.max_level));
        }

        // Walk the tree one level at a time, materializing the covers from the
        // parent/child structure rather than from the recorded levels.
        let mut cover: Vec<usize> = vec![root];
        let mut seen_total: HashSet<usize> = HashSet::from([root]);
        let mut level = self.max_level;
        loop {
            let r = radius(level);
            let in_level: HashSet<usize> = cover.iter().copied().collect();
            if in_level.len() != cover.len() {
                return fail(format!("point associated twice at level {level}"));
            }
            for &q in &cover {
                if self.top[q] < level {
                    return fail(format!("point {q} found at level {level} above its top {}", self.top[q]));
                }
            }
            // Separation: only pairs with a point new to this level can be
            // violated, older pairs were already more than 2^(level+1) apart.
            let fresh: Vec<usize> = cover.iter().copied().filter(|&q| self.top[q] == level && q != root).collect();
            for &a in &fresh {
                for &b in &cover {
                    if a != b {
                        let d = self.metric.distance(&self.points[a], &self.points[b]);
                        if d <= r {
                            return fail(format!("points {a} and {b} at level {level} only {d} apart (<= {r})"));
                        }
                    }
                }
            }
            if level == self.min_level {
                break;
            }
            let mut next = Vec::with_capacity(cover.len());
            for &q in &cover {
                next.push(q);
                for &c in self.explicit_children(q, level - 1) {
                    let d = self.metric.distance(&self.points[q], &self.points[c]);
                    if d > r {
                        return fail(format!("child {c} of {q} at level {} is {d} away (> {r})", level - 1));
                    }
                    if !seen_total.insert(c) {
                        return fail(format!("point {c} has more than one parent"));
                    }
                    next.push(c);
                }
            }
            // Nesting: every point of C_level survives into C_(level-1).
            if !cover.iter().all(|q| next.contains(q)) {
                return fail(format!("cover {level} not nested in cover {}", level - 1));
            }
            cover = next;
            level -= 1;
        }
        if seen_total.len() != self.points.len() {
            return fail(format!("{} of {} points reachable from the root", seen_total.len(), self.points.len()));
        }
        for (q, groups) in self.children.iter().enumerate() {
            for (l, _) in groups {
                if *l < self.min_level || *l >= self.top[q] {
                    return fail(format!("point {q} has children at level {l} outside its range"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_points() -> Vec<[f64; 2]> {
        vec![
            [50.0, 50.0],
            [30.0, 30.0],
            [30.0, 70.0],
            [70.0, 30.0],
            [70.0, 70.0],
            [30.0, 15.0],
            [20.0, 30.0],
            [70.0, 15.0],
            [85.0, 30.0],
            [20.0, 70.0],
            [10.0, 80.0],
        ]
    }

    fn fig_tree() -> CoverTree<[f64; 2]> {
        let mut t = CoverTree::new(Euclidean);
        for p in fig_points() {
            t.insert(p).unwrap();
        }
        t
    }

    #[test]
    fn empty_tree_signals() {
        let t: CoverTree<[f64; 2]> = CoverTree::new(Euclidean);
        assert_eq!(t.nearest(&[0.0, 0.0]), Err(CoverTreeError::Empty));
        assert_eq!(t.k_nearest(&[0.0, 0.0], 3), Err(CoverTreeError::Empty));
        assert_eq!(t.neighborhood(&[0.0, 0.0], 1.0), Err(CoverTreeError::Empty));
        assert!(t.audit().is_ok());
    }

    #[test]
    fn first_point_is_root() {
        let mut t = CoverTree::new(Euclidean);
        assert_eq!(t.insert([1.0, 2.0]), Ok(0));
        assert_eq!(t.len(), 1);
        assert_eq!(t.cover(t.max_level()), vec![0]);
        assert_eq!(t.closest(&[5.0, 5.0]).unwrap().index, 0);
        // The only stored point is the query itself.
        assert_eq!(t.nearest(&[1.0, 2.0]), Err(CoverTreeError::Empty));
    }

    #[test]
    fn duplicate_rejected() {
        let mut t = fig_tree();
        assert_eq!(t.insert([30.0, 15.0]), Err(CoverTreeError::Duplicate { existing: 5 }));
        assert_eq!(t.insert([50.0, 50.0]), Err(CoverTreeError::Duplicate { existing: 0 }));
        assert_eq!(t.len(), 11);
    }

    #[test]
    fn figure_covers() {
        let t = fig_tree();
        t.audit().unwrap();
        assert_eq!(t.max_level(), 6);
        assert_eq!(t.cover(6), vec![0]);
        assert_eq!(t.cover(5), vec![0, 10]);
        assert_eq!(t.cover(4), vec![0, 1, 2, 3, 4, 10]);
        assert_eq!(t.cover(3), (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn figure_neighborhood_of_x2() {
        // d(x2, x6) = 15, d(x2, x7) = 10, everything else is farther than 15.
        let t = fig_tree();
        let mut got: Vec<usize> = t.neighborhood(&[30.0, 30.0], 15.0).unwrap().iter().map(|n| n.index).collect();
        got.sort();
        assert_eq!(got, vec![5, 6]);
        assert!(t.neighborhood(&[0.0, 0.0], 0.0).unwrap().is_empty());
    }

    #[test]
    fn power_of_two_distances() {
        let mut t = CoverTree::new(Euclidean);
        for p in [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [4.0, 0.0], [0.5, 0.0], [8.0, 0.0]] {
            t.insert(p).unwrap();
        }
        t.audit().unwrap();
        assert_eq!(t.nearest(&[4.0, 0.0]).unwrap().distance, 2.0);
    }

    #[test]
    fn k_beyond_size_returns_everything_else() {
        let t = fig_tree();
        let got = t.k_nearest(&[50.0, 50.0], 100).unwrap();
        assert_eq!(got.len(), 10);
        assert!(got.windows(2).all(|w| w[0].distance <= w[1].distance));
        assert!(got.iter().all(|n| n.index != 0));
    }
}
