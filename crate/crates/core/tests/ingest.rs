mod common;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use routeplanner::csa::csa_query;
use routeplanner::geo::GeoPoint;
use routeplanner::gtfs::{build_timetable, build_transit_graph, generate_footpaths, parse_gtfs, GtfsConfig, GtfsError};
use routeplanner::model::{ModeSet, Stop, Timetable, TransportMode};
use routeplanner::osm::{parse_osm_file, OsmConfig};
use routeplanner::route_graph::transit_earliest_arrival;
use routeplanner::snapshot::{Snapshot, SnapshotError};

use common::fixture;

fn weekend() -> GtfsConfig {
    GtfsConfig { date: NaiveDate::from_ymd_opt(2006, 7, 1), ..GtfsConfig::default() }
}

#[test]
fn small_osm_extract() {
    let out = parse_osm_file(&fixture("small.osm"), &OsmConfig::default()).unwrap();
    let g = &out.graph;
    assert_eq!(out.kept_ways, 1);
    assert_eq!(g.node_count(), 2);
    assert_eq!(g.edge_count(), 1);
    let e = &g.edges()[0];
    assert_eq!(g.node(e.src as usize).id, 669209525);
    assert_eq!(g.node(e.dst as usize).id, 3993821274);
    assert_eq!(e.speed(TransportMode::Car), Some(120.0));
    assert_eq!(e.modes, ModeSet::single(TransportMode::Car));
}

#[test]
fn mission_feed() {
    let feed = parse_gtfs(&fixture("mission"), &weekend()).unwrap();
    assert_eq!(feed.stops.len(), 3);
    assert_eq!(feed.trips.len(), 2);
    let dropped = feed.warnings.iter().filter(|w| w.contains("unknown trip \"AWD1\"")).count();
    assert_eq!(dropped, 3, "{:?}", feed.warnings);

    let tt = build_timetable(&feed, &weekend()).unwrap();
    assert!(tt.validate().is_empty(), "{:?}", tt.validate());
    let awe1 = tt.trips().iter().position(|t| t.id == "AWE1").unwrap() as u32;
    let conns: Vec<_> = tt.connections().iter().filter(|c| c.trip == awe1).collect();
    assert_eq!(conns.len(), 2);
    let s = |id: &str| tt.stop_index(id).unwrap() as u32;
    assert_eq!((conns[0].dep_stop, conns[0].arr_stop, conns[0].dep_time, conns[0].arr_time), (s("S1"), s("S3"), 370, 380));
    assert_eq!((conns[1].dep_stop, conns[1].arr_stop, conns[1].dep_time, conns[1].arr_time), (s("S3"), s("S6"), 390, 405));

    // S3 and S6 are 1.6 km apart; the given transfers still join them.
    let walk = tt.footpaths_from(s("S3") as usize).iter().find(|f| f.to == s("S6")).unwrap();
    assert_eq!(walk.duration, (tt.stop(s("S3") as usize).point.distance(&tt.stop(s("S6") as usize).point) / (5.0 / 3.6)).ceil() as u32);
    assert!(tt.footpaths_from(s("S1") as usize).iter().all(|f| f.to == s("S1")));

    let tg = build_transit_graph(&feed, &weekend());
    assert!(tg.audit().is_empty(), "{:?}", tg.audit());
}

#[test]
fn weekday_has_no_weekend_trips() {
    let config = GtfsConfig { date: NaiveDate::from_ymd_opt(2006, 7, 3), ..GtfsConfig::default() };
    let feed = parse_gtfs(&fixture("mission"), &config).unwrap();
    assert!(feed.trips.is_empty());
    assert!(build_timetable(&feed, &config).unwrap().connections().is_empty());
}

#[test]
fn missing_table() {
    let dir = tempfile::tempdir().unwrap();
    match parse_gtfs(dir.path(), &GtfsConfig::default()) {
        Err(GtfsError::MissingTable(name)) => assert_eq!(name, "agency.txt"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn rhine_feed_answers_like_the_hand_built_timetable() {
    let config = GtfsConfig { date: NaiveDate::from_ymd_opt(2018, 10, 10), ..GtfsConfig::default() };
    let feed = parse_gtfs(&fixture("rhine"), &config).unwrap();
    assert!(feed.warnings.is_empty(), "{:?}", feed.warnings);
    let tt = build_timetable(&feed, &config).unwrap();
    assert_eq!(tt.connections().len(), 5);
    assert_eq!(tt.footpaths().len(), 3);
    let (f, k) = (tt.stop_index("f").unwrap(), tt.stop_index("k").unwrap());
    let j = csa_query(&tt, f, k, 15 * 3600 + 50 * 60).unwrap().journey.unwrap();
    assert_eq!(j.arrival, 17 * 3600 + 3 * 60);
    let tg = build_transit_graph(&feed, &config);
    assert_eq!(transit_earliest_arrival(&tg, f, k, 15 * 3600 + 50 * 60).unwrap().0, Some(j.arrival));
}

#[test]
fn generated_footpaths_are_valid_timetable_footpaths() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(1..40);
        let points: Vec<GeoPoint> = (0..n)
            .map(|_| GeoPoint::from_degrees(48.0 + rng.gen_range(0.0..0.02), 7.8 + rng.gen_range(0.0..0.03)).unwrap())
            .collect();
        let given: Vec<(usize, usize)> = (0..rng.gen_range(0..3)).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let fps = generate_footpaths(&points, &given, 600.0, 300, 5.0, 1_000_000).unwrap();
        let stops = points.iter().enumerate().map(|(i, &p)| Stop { id: i.to_string(), name: String::new(), point: p }).collect();
        let tt = Timetable::new(stops, Vec::new(), Vec::new(), fps);
        assert_eq!(tt.validate(), vec![]);
    }
}

#[test]
fn footpath_cap() {
    let p = GeoPoint::from_degrees(48.0, 7.8).unwrap();
    let err = generate_footpaths(&[p, p, p], &[], 600.0, 300, 5.0, 8).unwrap_err();
    assert!(matches!(err, GtfsError::TooManyFootpaths { count: 9, cap: 8 }));
}

#[test]
fn snapshot_round_trip() {
    let road = routeplanner::samples::two_cluster_road();
    let tt = routeplanner::samples::rhine_valley_timetable();
    let tg = routeplanner::samples::rhine_valley_transit_graph();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    Snapshot::new(road.clone(), tt.clone(), Some(tg.clone())).save(&path).unwrap();
    let back = Snapshot::load(&path).unwrap();
    assert_eq!(back.road.edges(), road.edges());
    assert_eq!(back.road.index_of(6), road.index_of(6));
    assert_eq!(back.timetable.connections(), tt.connections());
    assert_eq!(back.timetable.footpaths_from(2), tt.footpaths_from(2));
    assert_eq!(back.transit.unwrap().edges(), tg.edges());

    let text = std::fs::read_to_string(&path).unwrap().replacen("\"version\":1", "\"version\":99", 1);
    assert!(matches!(Snapshot::from_reader(text.as_bytes()), Err(SnapshotError::Version { found: 99, expected: 1 })));
}
