use routeplanner::anr::{modified_dijkstra_link_graph, select_access_nodes, AnrError, AnrQuery, Endpoint, Planner};
use routeplanner::model::{ModeSet, Timetable, TransportMode};
use routeplanner::route_graph::dijkstra;
use routeplanner::samples::{hm, node, rhine_valley_transit_graph, two_cluster_planner, two_cluster_road};

fn ends(p: &Planner) -> (usize, usize) {
    (p.road.index_of(node::FREIBURG_HOME).unwrap(), p.road.index_of(node::KARLSRUHE_OFFICE).unwrap())
}

fn leg_seconds(p: &Planner, a: i64, b: i64, kmh: f64) -> f64 {
    let (a, b) = (p.road.index_of(a).unwrap(), p.road.index_of(b).unwrap());
    p.road.node(a).point.distance(&p.road.node(b).point) / (kmh / 3.6)
}

#[test]
fn rail_beats_the_long_bike_ride() {
    let planner = two_cluster_planner();
    let (s, t) = ends(&planner);
    let dep = hm(15, 40);
    let r = planner.query(&AnrQuery::new(Endpoint::Node(s), Endpoint::Node(t), dep, ModeSet::ALL)).unwrap();

    assert_eq!((r.stats.nn_queries, r.stats.road_searches, r.stats.csa_queries, r.stats.road_only_searches), (2, 6, 9, 1));

    let best = r.best.unwrap();
    let modes: Vec<TransportMode> = best.legs.iter().map(|l| l.mode).collect();
    assert_eq!(modes, [TransportMode::Car, TransportMode::Foot, TransportMode::Tram, TransportMode::Foot, TransportMode::Car]);
    let access = leg_seconds(&planner, node::FREIBURG_HOME, node::FREIBURG_STATION, 50.0);
    let egress = leg_seconds(&planner, node::KARLSRUHE_STATION, node::KARLSRUHE_OFFICE, 50.0);
    assert_eq!(best.arrival, hm(17, 3) as f64 + egress);
    assert_eq!(best.legs[2].name.as_deref(), Some("ICE 104"));
    assert_eq!(best.legs[0].arrival, dep as f64 + access);

    // Legs chain in space and never run backwards in time.
    for w in best.legs.windows(2) {
        assert_eq!(w[0].coordinates.last(), w[1].coordinates.first());
        assert!(w[0].arrival <= w[1].departure);
    }

    let road_only = r.road_only.unwrap();
    assert!(road_only.legs.iter().all(|l| l.mode == TransportMode::Bike || l.mode == TransportMode::Car));

    let transit = rhine_valley_transit_graph();
    let lg = planner.link_graph(&transit).unwrap();
    let (p, _) = modified_dijkstra_link_graph(&lg, s, t, ModeSet::ALL, dep).unwrap();
    let link_cost = p.unwrap().cost;
    assert_eq!(link_cost, (hm(16, 58) - dep) as f64 + egress);
    assert!(link_cost <= best.total_cost());
    assert!(best.total_cost() <= road_only.total_cost());
}

#[test]
fn cars_cannot_cross_and_without_tram_nothing_connects() {
    let planner = two_cluster_planner();
    let (s, t) = ends(&planner);
    let car = ModeSet::single(TransportMode::Car);
    let r = planner.query(&AnrQuery::new(Endpoint::Node(s), Endpoint::Node(t), hm(15, 40), car)).unwrap();
    assert!(r.best.is_none());
    assert_eq!(r.stats.csa_queries, 0);

    let car_tram = ModeSet::of(&[TransportMode::Car, TransportMode::Tram]);
    let r = planner.query(&AnrQuery::new(Endpoint::Node(s), Endpoint::Node(t), hm(15, 40), car_tram)).unwrap();
    let best = r.best.unwrap();
    assert!(best.uses(TransportMode::Tram));
    assert!(!best.uses(TransportMode::Bike));
}

#[test]
fn late_departure_falls_back_to_the_road() {
    let planner = two_cluster_planner();
    let (s, t) = ends(&planner);
    let dep = hm(21, 0);
    let r = planner.query(&AnrQuery::new(Endpoint::Node(s), Endpoint::Node(t), dep, ModeSet::ALL)).unwrap();
    assert_eq!(r.best, r.road_only);

    let transit = rhine_valley_transit_graph();
    let lg = planner.link_graph(&transit).unwrap();
    let link = modified_dijkstra_link_graph(&lg, s, t, ModeSet::ALL, dep).unwrap().0.unwrap().cost;
    let road = dijkstra(&planner.road, s, t, ModeSet::ROAD).unwrap().0.unwrap().cost;
    assert_eq!(link, road);
}

#[test]
fn no_stops_means_road_only() {
    let empty = Timetable::new(Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let planner = Planner::new(two_cluster_road(), empty);
    let (s, t) = ends(&planner);
    let r = planner.query(&AnrQuery::new(Endpoint::Node(s), Endpoint::Node(t), hm(15, 40), ModeSet::ALL)).unwrap();
    let road = dijkstra(&planner.road, s, t, ModeSet::ROAD).unwrap().0.unwrap().cost;
    assert_eq!(r.best.unwrap().total_cost(), road);
    assert_eq!(r.stats.nn_queries, 0);
}

#[test]
fn points_resolve_to_nearest_road_node() {
    let planner = two_cluster_planner();
    let (s, t) = ends(&planner);
    let p = planner.road.node(s).point;
    assert_eq!(planner.resolve(Endpoint::Point(p)).unwrap(), s);
    let q = AnrQuery::new(Endpoint::Point(p), Endpoint::Node(t), hm(15, 40), ModeSet::ALL);
    let by_point = planner.query(&q).unwrap();
    let by_node = planner.query(&AnrQuery { from: Endpoint::Node(s), ..q }).unwrap();
    assert_eq!(by_point, by_node);
}

#[test]
fn query_validation() {
    let planner = two_cluster_planner();
    let q = AnrQuery::new(Endpoint::Node(0), Endpoint::Node(99), 0, ModeSet::ALL);
    assert!(matches!(planner.query(&q), Err(AnrError::Route(_))));
    assert_eq!(planner.query(&AnrQuery { k: 0, ..q }), Err(AnrError::ZeroK));
    assert_eq!(planner.query(&AnrQuery { modes: ModeSet::EMPTY, ..q }), Err(AnrError::NoModes));
}

#[test]
fn access_nodes_by_distance() {
    let planner = two_cluster_planner();
    let p = planner.road.node(planner.road.index_of(node::FREIBURG_HOME).unwrap()).point;
    let hits = select_access_nodes(&planner.stop_index, &p, 3);
    assert_eq!(hits.iter().map(|h| h.item).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert_eq!(select_access_nodes(&planner.stop_index, &p, 10).len(), 3);
    assert_eq!(select_access_nodes(&planner.stop_index, &p, 1)[0].item, 0);
}

#[test]
fn same_source_and_target() {
    let planner = two_cluster_planner();
    let (s, _) = ends(&planner);
    let r = planner.query(&AnrQuery::new(Endpoint::Node(s), Endpoint::Node(s), hm(12, 0), ModeSet::ALL)).unwrap();
    let best = r.best.unwrap();
    assert_eq!(best.total_cost(), 0.0);
    assert!(best.legs.is_empty());
}
