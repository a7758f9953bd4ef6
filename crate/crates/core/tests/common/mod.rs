//! Brute-force oracles and random instance generators shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;

use routeplanner::geo::GeoPoint;
use routeplanner::model::{Footpath, Seconds, Stop, Timetable, TransitGraph, Trip, TripEvent};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Single-source distances by Bellman-Ford over `(src, weight, dst)` triples.
pub fn bellman_ford(n: usize, edges: &[(usize, f64, usize)], s: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    dist[s] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(u, w, v) in edges {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// All-pairs distances by Floyd-Warshall.
pub fn floyd_warshall(n: usize, edges: &[(usize, f64, usize)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, w, v) in edges {
        if w < d[u][v] {
            d[u][v] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k].is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// A random digraph on `n` nodes with about `m` arcs and integer weights in 1..=20.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<(usize, f64, usize)> {
    (0..m)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(1..=20) as f64, rng.gen_range(0..n)))
        .filter(|(u, _, v)| u != v)
        .collect()
}

pub fn euclid(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Distances from `q` to every point, ascending, optionally without exact matches.
pub fn scan_sorted(points: &[[f64; 2]], q: &[f64; 2], exclude_self: bool) -> Vec<f64> {
    let mut d: Vec<f64> = points.iter().map(|p| euclid(p, q)).filter(|&d| !(exclude_self && d == 0.0)).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// The eleven points of the small planar example, `x1` at index 0.
pub fn planar_example() -> Vec<[f64; 2]> {
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

/// A random feed as trip events: `stops` stops on a small grid, `trips` trips
/// visiting 2 to 5 stops with travel times of 1-30 minutes and dwell times of
/// 0-3 minutes, all within one day.
pub fn random_feed<R: Rng>(rng: &mut R, stops: usize, trips: usize) -> (Vec<Stop>, Vec<Trip>, Vec<(u32, Vec<TripEvent>)>) {
    let stop_list: Vec<Stop> = (0..stops)
        .map(|i| Stop {
            id: format!("s{i}"),
            name: format!("Stop {i}"),
            point: GeoPoint::from_degrees(48.0 + 0.01 * (i / 4) as f64, 7.8 + 0.01 * (i % 4) as f64).unwrap(),
        })
        .collect();
    let trip_list: Vec<Trip> = (0..trips).map(|i| Trip { id: format!("t{i}"), name: None }).collect();
    let mut events = Vec::new();
    for trip in 0..trips as u32 {
        let len = rng.gen_range(2..=5.min(stops.max(2)));
        let mut time: Seconds = rng.gen_range(6 * 60..18 * 60) * 60;
        let mut prev: Option<u32> = None;
        let mut row = Vec::new();
        for i in 0..len {
            let mut stop = rng.gen_range(0..stops as u32);
            while Some(stop) == prev {
                stop = rng.gen_range(0..stops as u32);
            }
            if i > 0 {
                time += rng.gen_range(1..=30) * 60;
            }
            let arrival = time;
            time += rng.gen_range(0..=3) * 60;
            row.push(TripEvent { stop, arrival, departure: time });
            prev = Some(stop);
        }
        events.push((trip, row));
    }
    (stop_list, trip_list, events)
}

/// Timetable with self-loop footpaths only, and the transit graph with the
/// same transfer duration.
pub fn parity_models(
    stops: Vec<Stop>,
    trips: Vec<Trip>,
    events: &[(u32, Vec<TripEvent>)],
    transfer: Seconds,
) -> (Timetable, TransitGraph) {
    let points = stops.iter().map(|s| s.point).collect();
    let footpaths = (0..stops.len() as u32).map(|s| Footpath { from: s, duration: transfer, to: s }).collect();
    let tt = Timetable::new(stops, trips, Timetable::connections_of(events), footpaths);
    (tt, TransitGraph::build(points, events, transfer))
}
