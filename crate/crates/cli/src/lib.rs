//! Benchmark driver: loads the models, runs the selected algorithms and
//! returns one row per algorithm and rank (or departure time).

use std::path::PathBuf;

use anyhow::{bail, Context};
use chrono::NaiveDate;
use clap::Parser;

use routeplanner::anr::Planner;
use routeplanner::bench::{
    random_stop_pairs, run_multimodal, run_transit_sweep, sweep_times, Algorithm, BenchRow, QuerySetConfig, RankedQuerySet,
    RoadBench, SWEEP_STEP,
};
use routeplanner::gtfs::{build_timetable, build_transit_graph, parse_gtfs, GtfsConfig};
use routeplanner::model::{ModeSet, Seconds, Timetable, TransitGraph};
use routeplanner::osm::{parse_osm_file, OsmConfig};

#[derive(Debug, Clone, Parser)]
#[command(name = "bench", version, about = "Dijkstra-rank and time-sweep benchmarks")]
pub struct Args {
    /// OSM XML extract. Needed by road and multi-modal algorithms.
    #[arg(long)]
    pub osm: Option<PathBuf>,
    /// GTFS directory. Needed by transit and multi-modal algorithms.
    #[arg(long)]
    pub gtfs: Option<PathBuf>,
    /// Comma separated: dijkstra, astar, alt, csa, graph-dijkstra-transit, linkgraph-dijkstra, anr.
    #[arg(long, value_delimiter = ',', default_value = "dijkstra,astar,alt")]
    pub algo: Vec<Algorithm>,
    /// Random source nodes for rank queries, and stop pairs for the transit sweep.
    #[arg(long, default_value_t = 50)]
    pub sources: usize,
    /// Targets at ranks 2^0 ..= 2^K; sources reaching fewer than 2^K nodes are redrawn.
    #[arg(long, default_value_t = 15)]
    pub max_rank: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Service day for the GTFS feed. All trips when unset.
    #[arg(long)]
    pub date: Option<NaiveDate>,
    /// Allowed modes, comma separated.
    #[arg(long, default_value = "car,bike,foot,tram")]
    pub modes: ModeSet,
    /// Departure time of multi-modal queries, seconds of the day.
    #[arg(long, default_value_t = 12 * 3600)]
    pub dep_time: Seconds,
    /// Step of the transit sweep, seconds.
    #[arg(long, default_value_t = SWEEP_STEP)]
    pub step: Seconds,
    /// CSV output. Standard output when unset.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Transit {
    timetable: Timetable,
    graph: TransitGraph,
}

fn load_transit(args: &Args) -> anyhow::Result<Transit> {
    let Some(dir) = &args.gtfs else { bail!("--gtfs is required for transit and multi-modal algorithms") };
    let config = GtfsConfig { date: args.date, ..GtfsConfig::default() };
    let feed = parse_gtfs(dir, &config).with_context(|| format!("reading {}", dir.display()))?;
    let timetable = build_timetable(&feed, &config)?;
    let graph = build_transit_graph(&feed, &config);
    log::info!("timetable: {} stops, {} connections", timetable.stops().len(), timetable.connections().len());
    Ok(Transit { timetable, graph })
}

pub fn run(args: &Args) -> anyhow::Result<Vec<BenchRow>> {
    let road_algos: Vec<Algorithm> = args.algo.iter().copied().filter(|a| a.is_road()).collect();
    let transit_algos: Vec<Algorithm> = args.algo.iter().copied().filter(|a| a.is_transit()).collect();
    let mm_algos: Vec<Algorithm> = args.algo.iter().copied().filter(|a| a.is_multimodal()).collect();
    if args.modes.is_empty() {
        bail!("--modes is empty");
    }
    if args.max_rank >= usize::BITS {
        bail!("--max-rank {} is too large", args.max_rank);
    }

    let transit = if transit_algos.is_empty() && mm_algos.is_empty() { None } else { Some(load_transit(args)?) };
    let mut rows = Vec::new();

    if !road_algos.is_empty() || !mm_algos.is_empty() {
        let Some(osm) = &args.osm else { bail!("--osm is required for road and multi-modal algorithms") };
        let out = parse_osm_file(osm, &OsmConfig::default()).with_context(|| format!("reading {}", osm.display()))?;
        log::info!("road graph: {} nodes, {} edges", out.graph.node_count(), out.graph.edge_count());
        let road_modes = args.modes.intersection(ModeSet::ROAD);
        if road_modes.is_empty() {
            bail!("--modes must contain a road mode");
        }
        let timetable = match &transit {
            Some(t) if !mm_algos.is_empty() => t.timetable.clone(),
            _ => Timetable::new(Vec::new(), Vec::new(), Vec::new(), Vec::new()),
        };
        let planner = Planner::new(out.graph, timetable);
        let config = QuerySetConfig {
            sources: args.sources,
            max_exp: args.max_rank,
            min_max_rank: 1 << args.max_rank,
            seed: args.seed,
            allowed: road_modes,
            ..QuerySetConfig::default()
        };
        let queries = RankedQuerySet::generate(&planner.road, &config)?;
        log::info!("{} sources, ranks {:?}", queries.sources.len(), queries.ranks());

        if !road_algos.is_empty() {
            rows.extend(RoadBench::new(&planner.road, road_modes, args.seed).run(&road_algos, &queries)?);
        }
        if let Some(t) = transit.as_ref().filter(|_| !mm_algos.is_empty()) {
            let lg = planner.link_graph(&t.graph)?;
            rows.extend(run_multimodal(&mm_algos, &planner, &lg, &queries, args.dep_time, args.modes)?);
        }
    }

    if let Some(t) = transit.as_ref().filter(|_| !transit_algos.is_empty()) {
        let pairs = random_stop_pairs(t.timetable.stops().len(), args.sources, args.seed);
        if pairs.is_empty() {
            bail!("the timetable has no stops");
        }
        rows.extend(run_transit_sweep(&transit_algos, &t.timetable, &t.graph, &pairs, &sweep_times(args.step))?);
    }
    Ok(rows)
}
