mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use routeplanner::bench::dijkstra_ranks;
use routeplanner::graph::{arc_list, Digraph};
use routeplanner::model::{ModeSet, TransportMode};
use routeplanner::route_graph::{a_star, crow_flies_heuristic, dijkstra, dijkstra_all, many_to_one, LandmarkTable, RouteError};
use routeplanner::samples::geometric_graph;

use common::{bellman_ford, floyd_warshall, random_digraph};

fn digraph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, f64, usize)>)> {
    (2usize..30).prop_flat_map(|n| {
        let edge = (0..n, 1u32..50, 0..n).prop_map(|(u, w, v)| (u, w as f64, v));
        (Just(n), prop::collection::vec(edge, 0..n * 4))
    })
}

proptest! {
    #[test]
    fn dijkstra_matches_bellman_ford((n, edges) in digraph_strategy(), s_seed in any::<usize>()) {
        let g = Digraph::from_edges(n, &edges).unwrap();
        let s = s_seed % n;
        let oracle = bellman_ford(n, &edges, s);
        let tree = dijkstra_all(&g, s, ModeSet::ALL).unwrap();
        prop_assert_eq!(tree.distances(), &oracle[..]);
        for t in 0..n {
            let (p, _) = dijkstra(&g, s, t, ModeSet::ALL).unwrap();
            match p {
                None => prop_assert!(oracle[t].is_infinite()),
                Some(p) => {
                    prop_assert_eq!(p.cost, oracle[t]);
                    prop_assert_eq!(p.src(), s);
                    prop_assert_eq!(p.dest(), t);
                    let sum: f64 = p.edges.iter().map(|e| e.weight).sum();
                    prop_assert_eq!(sum, p.cost);
                    for e in &p.edges {
                        prop_assert!(edges.iter().any(|&(u, w, v)| u == e.src && v == e.dst && w == e.weight));
                    }
                }
            }
        }
    }

    #[test]
    fn alt_matches_bellman_ford((n, edges) in digraph_strategy(), count in 1usize..8, seed in any::<u64>()) {
        let g = Digraph::from_edges(n, &edges).unwrap();
        let lm = LandmarkTable::precompute(&g, count, seed);
        let all = floyd_warshall(n, &edges);
        for s in 0..n {
            for t in 0..n {
                let (p, _) = a_star(&g, s, t, ModeSet::ALL, |u| lm.heuristic(u, t)).unwrap();
                prop_assert_eq!(p.map(|p| p.cost).unwrap_or(f64::INFINITY), all[s][t]);
            }
        }
    }

    #[test]
    fn ranks_are_sorted_by_distance((n, edges) in digraph_strategy(), s_seed in any::<usize>()) {
        let g = Digraph::from_edges(n, &edges).unwrap();
        let s = s_seed % n;
        let order = dijkstra_ranks(&g, s, ModeSet::ALL).unwrap();
        let dist = bellman_ford(n, &edges, s);
        prop_assert_eq!(order[0], s);
        prop_assert_eq!(order.len(), dist.iter().filter(|d| d.is_finite()).count());
        for w in order.windows(2) {
            prop_assert!(dist[w[0]] <= dist[w[1]]);
        }
    }

    #[test]
    fn many_to_one_is_min_over_sources((n, edges) in digraph_strategy(), picks in prop::collection::vec(any::<usize>(), 1..4), t_seed in any::<usize>()) {
        let g = Digraph::from_edges(n, &edges).unwrap();
        let sources: Vec<usize> = picks.iter().map(|p| p % n).collect();
        let t = t_seed % n;
        let all = floyd_warshall(n, &edges);
        let best = sources.iter().map(|&s| all[s][t]).fold(f64::INFINITY, f64::min);
        let (p, _) = many_to_one(&g, &sources, t, ModeSet::ALL).unwrap();
        prop_assert_eq!(p.map(|p| p.cost).unwrap_or(f64::INFINITY), best);
    }
}

#[test]
fn geometric_graphs_agree_across_algorithms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..10 {
        let n = rng.gen_range(50..400);
        let road = geometric_graph(n, 4, round);
        for modes in [ModeSet::ROAD, ModeSet::of(&[TransportMode::Bike, TransportMode::Foot])] {
            let edges = arc_list(&road, modes);
            let lm = LandmarkTable::precompute(&road, 8, round);
            for _ in 0..5 {
                let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let oracle = bellman_ford(n, &edges, s)[t];
                let cost = |p: Option<routeplanner::route_graph::Path>| p.map(|p| p.cost).unwrap_or(f64::INFINITY);
                assert_eq!(cost(dijkstra(&road, s, t, modes).unwrap().0), oracle);
                assert_eq!(cost(a_star(&road, s, t, modes, crow_flies_heuristic(&road, t)).unwrap().0), oracle);
                assert_eq!(cost(a_star(&road, s, t, modes, |u| lm.heuristic(u, t)).unwrap().0), oracle);
            }
        }
    }
}

#[test]
fn mode_restriction_picks_fastest_allowed_mode() {
    let road = routeplanner::samples::two_cluster_road();
    let home = road.index_of(routeplanner::samples::node::FREIBURG_HOME).unwrap();
    let station = road.index_of(routeplanner::samples::node::FREIBURG_STATION).unwrap();
    let d = road.node(home).point.distance(&road.node(station).point);
    for (modes, kmh, mode) in [
        (ModeSet::ROAD, 50.0, TransportMode::Car),
        (ModeSet::of(&[TransportMode::Foot, TransportMode::Bike]), 14.0, TransportMode::Bike),
        (ModeSet::single(TransportMode::Foot), 5.0, TransportMode::Foot),
    ] {
        let p = dijkstra(&road, home, station, modes).unwrap().0.unwrap();
        assert_eq!(p.cost, d / (kmh / 3.6));
        assert_eq!(p.edges[0].mode, Some(mode));
    }
    let far = road.index_of(routeplanner::samples::node::KARLSRUHE_OFFICE).unwrap();
    assert!(dijkstra(&road, home, far, ModeSet::single(TransportMode::Car)).unwrap().0.is_none());
    assert!(dijkstra(&road, home, far, ModeSet::single(TransportMode::Bike)).unwrap().0.is_some());
}

#[test]
fn invalid_nodes_are_rejected() {
    let g = Digraph::from_edges(3, &[(0, 1.0, 1)]).unwrap();
    assert_eq!(dijkstra(&g, 0, 5, ModeSet::ALL).unwrap_err(), RouteError::InvalidNode { node: 5, count: 3 });
    assert_eq!(dijkstra(&g, 9, 1, ModeSet::ALL).unwrap_err(), RouteError::InvalidNode { node: 9, count: 3 });
    assert_eq!(many_to_one(&g, &[], 1, ModeSet::ALL).unwrap_err(), RouteError::NoSource);
}

#[test]
fn source_equals_target() {
    let g = Digraph::from_edges(2, &[(0, 1.0, 1)]).unwrap();
    let p = dijkstra(&g, 1, 1, ModeSet::ALL).unwrap().0.unwrap();
    assert_eq!(p.cost, 0.0);
    assert!(p.is_empty());
}

#[test]
fn random_digraph_generator_has_no_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(random_digraph(&mut rng, 10, 100).iter().all(|(u, _, v)| u != v));
}
