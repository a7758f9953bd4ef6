//! Dijkstra-rank query sets and a small timing harness.
//!
//! The rank of a node `v` relative to a source `s` is the position at which a
//! full Dijkstra run from `s` polls `v` (the source has rank 1). Grouping
//! queries by rank gives a hardware-independent notion of query range.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::anr::{modified_dijkstra_link_graph, AnrQuery, Endpoint, Planner};
use crate::csa::csa_query;
use crate::graph::Network;
use crate::model::{LinkGraph, ModeSet, RoadGraph, Seconds, TransitGraph};
use crate::route_graph::{a_star, crow_flies_heuristic, dijkstra, dijkstra_all, transit_earliest_arrival};
use crate::route_graph::{LandmarkTable, RouteError, DEFAULT_LANDMARKS};

/// Untimed queries run before each measured configuration.
pub const WARM_UP_QUERIES: usize = 10;

/// Seconds between two departure times of the transit sweep.
pub const SWEEP_STEP: Seconds = 600;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("algorithm {0} needs {1}")]
    Unsupported(Algorithm, &'static str),
    #[error("no source with at least {min_max_rank} reachable nodes after {attempts} draws")]
    NoSources { min_max_rank: usize, attempts: usize },
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Poll order of a full Dijkstra run from `s`: entry `r - 1` is the node of rank `r`.
pub fn dijkstra_ranks<G: Network + ?Sized>(g: &G, s: usize, allowed: ModeSet) -> Result<Vec<usize>, RouteError> {
    Ok(dijkstra_all(g, s, allowed)?.order().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuerySetConfig {
    pub sources: usize,
    /// Targets are drawn at ranks 2^0 ..= 2^max_exp.
    pub max_exp: u32,
    /// Sources reaching fewer nodes are redrawn.
    pub min_max_rank: usize,
    pub seed: u64,
    pub allowed: ModeSet,
    /// Draws allowed per requested source before giving up.
    pub attempts_per_source: usize,
}

impl Default for QuerySetConfig {
    fn default() -> Self {
        QuerySetConfig {
            sources: 50,
            max_exp: 15,
            min_max_rank: 1 << 15,
            seed: 0,
            allowed: ModeSet::ROAD,
            attempts_per_source: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedSource {
    pub source: usize,
    /// `(rank, node)`, ascending by rank.
    pub targets: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedQuerySet {
    pub sources: Vec<RankedSource>,
}

impl RankedQuerySet {
    /// Draws sources uniformly at random and assigns each its targets at
    /// power-of-two ranks.
    pub fn generate<G: Network + ?Sized>(g: &G, config: &QuerySetConfig) -> Result<Self, BenchError> {
        let n = g.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let attempts = config.sources.max(1) * config.attempts_per_source;
        let mut sources = Vec::with_capacity(config.sources);
        let mut draws = 0;
        while sources.len() < config.sources {
            if n == 0 || draws == attempts {
                return Err(BenchError::NoSources { min_max_rank: config.min_max_rank, attempts: draws });
            }
            draws += 1;
            let s = rng.gen_range(0..n);
            let order = dijkstra_ranks(g, s, config.allowed)?;
            if order.len() < config.min_max_rank {
                continue;
            }
            let targets = (0..=config.max_exp)
                .map(|e| 1usize << e)
                .take_while(|&r| r <= order.len())
                .map(|r| (r, order[r - 1]))
                .collect();
            sources.push(RankedSource { source: s, targets });
        }
        Ok(RankedQuerySet { sources })
    }

    /// All `(source, target)` pairs at `rank`.
    pub fn at_rank(&self, rank: usize) -> Vec<(usize, usize)> {
        self.sources
            .iter()
            .filter_map(|q| q.targets.iter().find(|(r, _)| *r == rank).map(|&(_, t)| (q.source, t)))
            .collect()
    }

    /// Distinct ranks present, ascending.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.sources.iter().flat_map(|q| q.targets.iter().map(|(r, _)| *r)).collect();
        r.sort_unstable();
        r.dedup();
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Dijkstra,
    AStar,
    Alt,
    Csa,
    GraphDijkstraTransit,
    LinkGraphDijkstra,
    Anr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Dijkstra,
        Algorithm::AStar,
        Algorithm::Alt,
        Algorithm::Csa,
        Algorithm::GraphDijkstraTransit,
        Algorithm::LinkGraphDijkstra,
        Algorithm::Anr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dijkstra => "dijkstra",
            Algorithm::AStar => "astar",
            Algorithm::Alt => "alt",
            Algorithm::Csa => "csa",
            Algorithm::GraphDijkstraTransit => "graph-dijkstra-transit",
            Algorithm::LinkGraphDijkstra => "linkgraph-dijkstra",
            Algorithm::Anr => "anr",
        }
    }

    pub fn is_road(self) -> bool {
        matches!(self, Algorithm::Dijkstra | Algorithm::AStar | Algorithm::Alt)
    }

    pub fn is_transit(self) -> bool {
        matches!(self, Algorithm::Csa | Algorithm::GraphDijkstraTransit)
    }

    pub fn is_multimodal(self) -> bool {
        matches!(self, Algorithm::LinkGraphDijkstra | Algorithm::Anr)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::UnknownAlgorithm(s.to_string()))
    }
}

/// Parses `dijkstra,alt,...`.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>, BenchError> {
    list.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algo: String,
    /// Rank for rank-based runs, departure second of the day for the sweep.
    pub param: u64,
    pub mean_ms: f64,
    pub mean_settled: f64,
    pub n: usize,
}

/// Writes rows with the header `algo,param,mean_ms,mean_settled,n`.
pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["algo", "param", "mean_ms", "mean_settled", "n"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Outcome of one measured query: cost (seconds, or arrival time for transit)
/// and the work done (settled nodes or scanned connections).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOutcome {
    pub cost: Option<f64>,
    pub settled: usize,
}

/// Runs `f` over `queries` after [`WARM_UP_QUERIES`] untimed calls and
/// averages time and work.
fn measure<Q, F>(algo: Algorithm, param: u64, queries: &[Q], mut f: F) -> Result<(BenchRow, Vec<QueryOutcome>), BenchError>
where
    F: FnMut(&Q) -> Result<QueryOutcome, BenchError>,
{
    for q in queries.iter().cycle().take(WARM_UP_QUERIES.min(queries.len() * WARM_UP_QUERIES)) {
        f(q)?;
    }
    let mut outcomes = Vec::with_capacity(queries.len());
    let mut total_ms = 0.0;
    for q in queries {
        let start = Instant::now();
        let o = f(q)?;
        total_ms += start.elapsed().as_secs_f64() * 1000.0;
        outcomes.push(o);
    }
    let n = queries.len();
    let denom = n.max(1) as f64;
    let settled: usize = outcomes.iter().map(|o| o.settled).sum();
    let row = BenchRow { algo: algo.name().to_string(), param, mean_ms: total_ms / denom, mean_settled: settled as f64 / denom, n };
    Ok((row, outcomes))
}

/// Road graph plus the lazily built landmark table.
pub struct RoadBench<'a> {
    pub road: &'a RoadGraph,
    pub allowed: ModeSet,
    landmarks: Option<LandmarkTable>,
    landmark_count: usize,
    seed: u64,
}

impl<'a> RoadBench<'a> {
    pub fn new(road: &'a RoadGraph, allowed: ModeSet, seed: u64) -> Self {
        RoadBench { road, allowed, landmarks: None, landmark_count: DEFAULT_LANDMARKS, seed }
    }

    pub fn with_landmark_count(mut self, count: usize) -> Self {
        self.landmark_count = count;
        self.landmarks = None;
        self
    }

    pub fn landmarks(&mut self) -> &LandmarkTable {
        let (road, count, seed) = (self.road, self.landmark_count, self.seed);
        self.landmarks.get_or_insert_with(|| LandmarkTable::precompute(road, count, seed))
    }

    /// One road query with a road algorithm.
    pub fn query(&mut self, algo: Algorithm, s: usize, t: usize) -> Result<QueryOutcome, BenchError> {
        let (path, stats) = match algo {
            Algorithm::Dijkstra => dijkstra(self.road, s, t, self.allowed)?,
            Algorithm::AStar => a_star(self.road, s, t, self.allowed, crow_flies_heuristic(self.road, t))?,
            Algorithm::Alt => {
                let (road, allowed) = (self.road, self.allowed);
                let lm = self.landmarks();
                a_star(road, s, t, allowed, |u| lm.heuristic(u, t))?
            }
            other => return Err(BenchError::Unsupported(other, "a road algorithm")),
        };
        Ok(QueryOutcome { cost: path.map(|p| p.cost), settled: stats.settled })
    }

    /// One row per algorithm and rank.
    pub fn run(&mut self, algos: &[Algorithm], queries: &RankedQuerySet) -> Result<Vec<BenchRow>, BenchError> {
        let mut rows = Vec::new();
        for &algo in algos {
            if algo == Algorithm::Alt {
                self.landmarks();
            }
            for rank in queries.ranks() {
                let pairs = queries.at_rank(rank);
                let (row, _) = measure(algo, rank as u64, &pairs, |&(s, t)| self.query(algo, s, t))?;
                rows.push(row);
            }
        }
        Ok(rows)
    }
}

/// `count` uniformly random ordered stop pairs.
pub fn random_stop_pairs(stop_count: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    if stop_count == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (rng.gen_range(0..stop_count), rng.gen_range(0..stop_count))).collect()
}

/// Departure times over one day, `step` seconds apart, starting at midnight.
pub fn sweep_times(step: Seconds) -> Vec<Seconds> {
    (0..86_400 / step.max(1)).map(|i| i * step).collect()
}

/// One transit query. The cost is the arrival time.
pub fn transit_query(
    algo: Algorithm,
    tt: &crate::model::Timetable,
    tg: &TransitGraph,
    s: usize,
    t: usize,
    tau: Seconds,
) -> Result<QueryOutcome, BenchError> {
    match algo {
        Algorithm::Csa => {
            let r = csa_query(tt, s, t, tau).map_err(|_| RouteError::InvalidNode { node: s.max(t), count: tt.stops().len() })?;
            Ok(QueryOutcome { cost: r.arrival().map(f64::from), settled: r.scanned })
        }
        Algorithm::GraphDijkstraTransit => {
            let (a, st) = transit_earliest_arrival(tg, s, t, tau)?;
            Ok(QueryOutcome { cost: a.map(f64::from), settled: st.settled })
        }
        other => Err(BenchError::Unsupported(other, "a transit algorithm")),
    }
}

/// Time-dependent sweep: one row per algorithm and departure time, each over
/// the same stop pairs.
pub fn run_transit_sweep(
    algos: &[Algorithm],
    tt: &crate::model::Timetable,
    tg: &TransitGraph,
    pairs: &[(usize, usize)],
    times: &[Seconds],
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &algo in algos {
        for &tau in times {
            let (row, _) = measure(algo, tau as u64, pairs, |&(s, t)| transit_query(algo, tt, tg, s, t, tau))?;
            rows.push(row);
        }
    }
    Ok(rows)
}

/// One multi-modal query between road nodes. The cost is the travel time.
pub fn multimodal_query(
    algo: Algorithm,
    planner: &Planner,
    lg: &LinkGraph<'_>,
    s: usize,
    t: usize,
    dep: Seconds,
    modes: ModeSet,
) -> Result<QueryOutcome, BenchError> {
    match algo {
        Algorithm::LinkGraphDijkstra => {
            let (p, st) = modified_dijkstra_link_graph(lg, s, t, modes, dep)?;
            Ok(QueryOutcome { cost: p.map(|p| p.cost), settled: st.settled })
        }
        Algorithm::Anr => {
            let q = AnrQuery::new(Endpoint::Node(s), Endpoint::Node(t), dep, modes);
            let r = planner.query(&q).map_err(|e| match e {
                crate::anr::AnrError::Route(r) => BenchError::Route(r),
                _ => BenchError::Unsupported(algo, "a resolvable query"),
            })?;
            Ok(QueryOutcome { cost: r.best.map(|j| j.total_cost()), settled: r.stats.work })
        }
        other => Err(BenchError::Unsupported(other, "a multi-modal algorithm")),
    }
}

/// Multi-modal run at a fixed departure time, one row per algorithm and rank.
pub fn run_multimodal(
    algos: &[Algorithm],
    planner: &Planner,
    lg: &LinkGraph<'_>,
    queries: &RankedQuerySet,
    dep: Seconds,
    modes: ModeSet,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &algo in algos {
        for rank in queries.ranks() {
            let pairs = queries.at_rank(rank);
            let (row, _) = measure(algo, rank as u64, &pairs, |&(s, t)| multimodal_query(algo, planner, lg, s, t, dep, modes))?;
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Picks `count` distinct random elements; used to subsample large query sets.
pub fn subsample<T: Clone>(items: &[T], count: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    items.choose_multiple(&mut rng, count).cloned().collect()
}
