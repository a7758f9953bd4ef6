mod common;

use proptest::prelude::*;

use routeplanner::cover_tree::{CoverTree, CoverTreeError, Euclidean};
use routeplanner::geo::GeoPoint;
use routeplanner::spatial::PointIndex;

use common::{euclid, planar_example, scan_sorted};

fn planar_tree() -> CoverTree<[f64; 2]> {
    let (t, reps) = CoverTree::build(Euclidean, planar_example());
    assert_eq!(reps, (0..11).collect::<Vec<_>>());
    t
}

#[test]
fn planar_example_nearest() {
    let t = planar_tree();
    let pts = planar_example();
    let n = t.nearest(&pts[4]).unwrap();
    assert_eq!(n.index, 0);
    assert_eq!(n.distance, 800f64.sqrt());
    let n = t.nearest(&pts[0]).unwrap();
    assert!([1, 2, 3, 4].contains(&n.index));
    assert_eq!(n.distance, 800f64.sqrt());
    assert_eq!(t.closest(&pts[0]).unwrap().index, 0);
}

#[test]
fn planar_example_structure() {
    let t = planar_tree();
    t.audit().unwrap();
    assert_eq!(t.cover(t.max_level()), vec![0]);
    let mut bottom = t.cover(t.min_level());
    bottom.sort_unstable();
    assert_eq!(bottom, (0..11).collect::<Vec<_>>());
}

#[test]
fn planar_example_neighborhood() {
    let t = planar_tree();
    let pts = planar_example();
    let mut hits: Vec<usize> = t.neighborhood(&pts[1], 15.0).unwrap().iter().map(|n| n.index).collect();
    hits.sort_unstable();
    assert_eq!(hits, vec![5, 6]);
    let k = t.k_nearest(&pts[4], 1).unwrap();
    assert_eq!(k.len(), 1);
    assert_eq!(k[0].index, 0);
}

#[test]
fn duplicates_and_empty() {
    let mut t = planar_tree();
    assert_eq!(t.insert([30.0, 70.0]), Err(CoverTreeError::Duplicate { existing: 2 }));
    let empty: CoverTree<[f64; 2]> = CoverTree::new(Euclidean);
    assert_eq!(empty.nearest(&[0.0, 0.0]), Err(CoverTreeError::Empty));
    let single = CoverTree::build(Euclidean, [[1.0, 1.0]]).0;
    assert_eq!(single.nearest(&[1.0, 1.0]), Err(CoverTreeError::Empty));
    assert_eq!(single.closest(&[1.0, 1.0]).unwrap().distance, 0.0);
}

#[test]
fn point_index_on_sphere() {
    let pts: Vec<GeoPoint> = (0..50)
        .map(|i| GeoPoint::from_degrees(48.0 + 0.001 * (i % 7) as f64, 7.8 + 0.0013 * (i / 7) as f64).unwrap())
        .chain([GeoPoint::from_degrees(48.0, 7.8).unwrap()])
        .collect();
    let index = PointIndex::build(pts.iter().copied());
    let q = GeoPoint::from_degrees(48.0031, 7.8052).unwrap();
    let best = pts.iter().enumerate().min_by(|a, b| a.1.distance(&q).total_cmp(&b.1.distance(&q))).unwrap();
    let hit = index.closest(&q).unwrap();
    assert_eq!(hit.distance, best.1.distance(&q));
    // The duplicate at index 50 is reported under the first index holding that point.
    assert_eq!(index.closest(&pts[50]).unwrap().item, 0);
    let within = index.within(&pts[0], 0.0);
    assert_eq!(within.iter().map(|h| h.item).collect::<Vec<_>>(), vec![0, 50]);
}

fn points() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0i32..64, 0i32..64).prop_map(|(x, y)| [x as f64, y as f64]), 1..120)
}

proptest! {
    #[test]
    fn matches_linear_scan(pts in points(), q in (0i32..64, 0i32..64), k in 1usize..9, r in 0.0f64..20.0) {
        let (t, _) = CoverTree::build(Euclidean, pts.clone());
        prop_assert!(t.audit().is_ok(), "{:?}", t.audit());
        let q = [q.0 as f64, q.1 as f64];
        let stored: Vec<[f64; 2]> = t.points().to_vec();
        let all = scan_sorted(&stored, &q, false);
        let others = scan_sorted(&stored, &q, true);

        prop_assert_eq!(t.closest(&q).unwrap().distance, all[0]);
        match t.nearest(&q) {
            Ok(n) => prop_assert_eq!(n.distance, others[0]),
            Err(_) => prop_assert!(others.is_empty()),
        }
        let got: Vec<f64> = t.k_nearest(&q, k).unwrap_or_default().iter().map(|n| n.distance).collect();
        prop_assert_eq!(&got[..], &others[..k.min(others.len())]);
        let got: Vec<f64> = t.k_closest(&q, k).unwrap().iter().map(|n| n.distance).collect();
        prop_assert_eq!(&got[..], &all[..k.min(all.len())]);

        let mut hood: Vec<usize> = t.neighborhood(&q, r).unwrap().iter().map(|n| n.index).collect();
        hood.sort_unstable();
        let expected: Vec<usize> = (0..stored.len()).filter(|&i| { let d = euclid(&stored[i], &q); d > 0.0 && d <= r }).collect();
        prop_assert_eq!(hood, expected);
    }
}
