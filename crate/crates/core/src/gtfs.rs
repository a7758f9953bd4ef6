//! Timetables and transit graphs from GTFS feeds.
//!
//! Reads an extracted feed directory. Required tables are agency, routes,
//! trips, stop_times, stops and calendar; transfers is optional. Everything
//! else in the directory is ignored.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use csv::{ReaderBuilder, StringRecord, Trim};
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::model::{kmh_to_mps, Footpath, Seconds, Stop, Timetable, TransitGraph, Trip, TripEvent};
use crate::spatial::PointIndex;

#[derive(Debug, Error)]
pub enum GtfsError {
    #[error("required table {0} is missing")]
    MissingTable(String),
    #[error("{file}: {source}")]
    Csv { file: String, source: csv::Error },
    #[error("{file}: column {column} is missing")]
    MissingColumn { file: String, column: String },
    #[error("footpath generation would create {count} footpaths, more than the cap of {cap}")]
    TooManyFootpaths { count: usize, cap: usize },
}

#[derive(Debug, Clone)]
pub struct GtfsConfig {
    /// Only trips running on this day are loaded. All trips when unset.
    pub date: Option<NaiveDate>,
    /// Stops closer than this are joined by footpaths, meters.
    pub footpath_radius_m: f64,
    /// Minimum transfer time, also the duration of every self-loop footpath.
    pub buffer: Seconds,
    pub walk_kmh: f64,
    /// Transfer duration in the transit graph; defaults to `buffer`.
    pub transfer_duration: Option<Seconds>,
    /// Upper bound on generated footpaths.
    pub max_footpaths: usize,
}

impl Default for GtfsConfig {
    fn default() -> Self {
        GtfsConfig {
            date: None,
            footpath_radius_m: 600.0,
            buffer: 300,
            walk_kmh: 5.0,
            transfer_duration: None,
            max_footpaths: 5_000_000,
        }
    }
}

impl GtfsConfig {
    pub fn transfer_duration(&self) -> Seconds {
        self.transfer_duration.unwrap_or(self.buffer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calendar {
    pub service_id: String,
    /// Monday first.
    pub days: [bool; 7],
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Calendar {
    pub fn is_active(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end && self.days[date.weekday().num_days_from_monday() as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedTrip {
    pub id: String,
    pub route_id: String,
    pub service_id: String,
    /// Route short name, falling back to the headsign.
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopTime {
    pub stop: u32,
    pub arrival: Seconds,
    pub departure: Seconds,
    pub sequence: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GivenTransfer {
    pub from: u32,
    pub to: u32,
    pub min_time: Option<Seconds>,
}

/// The parsed tables that matter for routing.
#[derive(Debug, Clone, Default)]
pub struct Feed {
    pub stops: Vec<Stop>,
    pub trips: Vec<FeedTrip>,
    /// Per trip, ordered by stop sequence.
    pub stop_times: Vec<Vec<StopTime>>,
    pub calendars: Vec<Calendar>,
    pub transfers: Vec<GivenTransfer>,
    pub warnings: Vec<String>,
}

/// `H:MM:SS` or `HH:MM:SS`; hours may exceed 23.
pub fn parse_time(s: &str) -> Option<Seconds> {
    let mut parts = s.trim().split(':');
    let h: u32 = parts.next()?.parse().ok()?;
    let m: u32 = parts.next()?.parse().ok()?;
    let sec: u32 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || m > 59 || sec > 59 {
        return None;
    }
    h.checked_mul(3600)?.checked_add(m * 60 + sec)
}

struct Table {
    file: String,
    columns: HashMap<String, usize>,
    rows: Vec<StringRecord>,
}

impl Table {
    fn read(dir: &Path, name: &str, required: bool) -> Result<Option<Table>, GtfsError> {
        let path: PathBuf = dir.join(name);
        if !path.is_file() {
            return if required { Err(GtfsError::MissingTable(name.into())) } else { Ok(None) };
        }
        let csv_err = |source| GtfsError::Csv { file: name.into(), source };
        let mut reader = ReaderBuilder::new().trim(Trim::All).flexible(true).from_path(&path).map_err(csv_err)?;
        let columns = reader
            .headers()
            .map_err(csv_err)?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim_start_matches('\u{feff}').to_string(), i))
            .collect();
        let rows = reader.records().collect::<Result<Vec<_>, _>>().map_err(csv_err)?;
        Ok(Some(Table { file: name.into(), columns, rows }))
    }

    fn column(&self, name: &str) -> Result<usize, GtfsError> {
        self.columns.get(name).copied().ok_or_else(|| GtfsError::MissingColumn { file: self.file.clone(), column: name.into() })
    }

    fn optional_column(&self, name: &str) -> Option<usize> {
        self.columns.get(name).copied()
    }
}

fn field(row: &StringRecord, col: usize) -> &str {
    row.get(col).unwrap_or("")
}

fn non_empty(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

/// Parses the feed in `dir`, keeping only trips active on `config.date` if set.
pub fn parse_gtfs(dir: &Path, config: &GtfsConfig) -> Result<Feed, GtfsError> {
    Table::read(dir, "agency.txt", true)?;
    let routes = Table::read(dir, "routes.txt", true)?.unwrap();
    let trips = Table::read(dir, "trips.txt", true)?.unwrap();
    let stop_times = Table::read(dir, "stop_times.txt", true)?.unwrap();
    let stops = Table::read(dir, "stops.txt", true)?.unwrap();
    let calendar = Table::read(dir, "calendar.txt", true)?.unwrap();
    let transfers = Table::read(dir, "transfers.txt", false)?;

    let mut feed = Feed::default();
    let warn = |feed: &mut Feed, msg: String| {
        log::warn!("{msg}");
        feed.warnings.push(msg);
    };

    // stops
    let (c_id, c_lat, c_lon) = (stops.column("stop_id")?, stops.column("stop_lat")?, stops.column("stop_lon")?);
    let c_name = stops.optional_column("stop_name");
    let mut stop_index: HashMap<String, u32> = HashMap::new();
    for row in &stops.rows {
        let id = field(row, c_id).to_string();
        let point = field(row, c_lat)
            .parse::<f64>()
            .ok()
            .zip(field(row, c_lon).parse::<f64>().ok())
            .and_then(|(lat, lon)| GeoPoint::from_degrees(lat, lon).ok());
        let Some(point) = point else {
            warn(&mut feed, format!("stops.txt: stop {id:?} has no valid coordinate, dropped"));
            continue;
        };
        if stop_index.contains_key(&id) {
            warn(&mut feed, format!("stops.txt: stop {id:?} defined twice, keeping the first"));
            continue;
        }
        stop_index.insert(id.clone(), feed.stops.len() as u32);
        let name = c_name.map(|c| field(row, c).to_string()).unwrap_or_default();
        feed.stops.push(Stop { id, name, point });
    }

    // calendar
    let days = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
        .map(|d| calendar.column(d))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let (c_service, c_start, c_end) =
        (calendar.column("service_id")?, calendar.column("start_date")?, calendar.column("end_date")?);
    for row in &calendar.rows {
        let date = |c| NaiveDate::parse_from_str(field(row, c), "%Y%m%d").ok();
        let (Some(start), Some(end)) = (date(c_start), date(c_end)) else {
            warn(&mut feed, format!("calendar.txt: service {:?} has invalid dates, dropped", field(row, c_service)));
            continue;
        };
        let mut flags = [false; 7];
        for (flag, &c) in flags.iter_mut().zip(&days) {
            *flag = field(row, c) == "1";
        }
        feed.calendars.push(Calendar { service_id: field(row, c_service).to_string(), days: flags, start, end });
    }
    let active = |service: &str| match config.date {
        None => true,
        Some(d) => feed.calendars.iter().any(|c| c.service_id == service && c.is_active(d)),
    };

    // trips
    let c_short = routes.optional_column("route_short_name");
    let c_route = routes.column("route_id")?;
    let route_names: HashMap<&str, &str> = routes
        .rows
        .iter()
        .filter_map(|r| c_short.map(|c| (field(r, c_route), field(r, c))))
        .filter(|(_, n)| !n.is_empty())
        .collect();
    let (t_route, t_service, t_id) = (trips.column("route_id")?, trips.column("service_id")?, trips.column("trip_id")?);
    let t_headsign = trips.optional_column("trip_headsign");
    let mut trip_index: HashMap<String, Option<u32>> = HashMap::new();
    let mut skipped = 0;
    for row in &trips.rows {
        let id = field(row, t_id).to_string();
        if !active(field(row, t_service)) {
            trip_index.insert(id, None);
            skipped += 1;
            continue;
        }
        let route_id = field(row, t_route).to_string();
        let name = route_names
            .get(route_id.as_str())
            .map(|n| n.to_string())
            .or_else(|| t_headsign.and_then(|c| non_empty(field(row, c))));
        trip_index.insert(id.clone(), Some(feed.trips.len() as u32));
        feed.trips.push(FeedTrip { id, route_id, service_id: field(row, t_service).to_string(), name });
    }
    if skipped > 0 {
        log::info!("{skipped} trips not running on the selected day");
    }

    // stop_times
    feed.stop_times = vec![Vec::new(); feed.trips.len()];
    let s_trip = stop_times.column("trip_id")?;
    let s_arr = stop_times.column("arrival_time")?;
    let s_dep = stop_times.column("departure_time")?;
    let s_stop = stop_times.column("stop_id")?;
    let s_seq = stop_times.column("stop_sequence")?;
    for (line, row) in stop_times.rows.iter().enumerate() {
        let line = line + 2;
        let trip = match trip_index.get(field(row, s_trip)) {
            Some(Some(t)) => *t,
            Some(None) => continue,
            None => {
                warn(&mut feed, format!("stop_times.txt:{line}: unknown trip {:?}, row dropped", field(row, s_trip)));
                continue;
            }
        };
        let Some(&stop) = stop_index.get(field(row, s_stop)) else {
            warn(&mut feed, format!("stop_times.txt:{line}: unknown stop {:?}, row dropped", field(row, s_stop)));
            continue;
        };
        let (arr, dep) = (parse_time(field(row, s_arr)), parse_time(field(row, s_dep)));
        let (arrival, departure) = match (arr, dep) {
            (Some(a), Some(d)) => (a, d),
            (Some(a), None) if field(row, s_dep).is_empty() => (a, a),
            (None, Some(d)) if field(row, s_arr).is_empty() => (d, d),
            _ => {
                warn(&mut feed, format!("stop_times.txt:{line}: unparseable time, row dropped"));
                continue;
            }
        };
        let Ok(sequence) = field(row, s_seq).parse::<u32>() else {
            warn(&mut feed, format!("stop_times.txt:{line}: invalid stop_sequence, row dropped"));
            continue;
        };
        feed.stop_times[trip as usize].push(StopTime { stop, arrival, departure, sequence });
    }
    for times in &mut feed.stop_times {
        times.sort_by_key(|st| st.sequence);
    }

    // transfers
    if let Some(transfers) = transfers {
        let (f_from, f_to) = (transfers.column("from_stop_id")?, transfers.column("to_stop_id")?);
        let f_time = transfers.optional_column("min_transfer_time");
        for (line, row) in transfers.rows.iter().enumerate() {
            let (from, to) = (stop_index.get(field(row, f_from)), stop_index.get(field(row, f_to)));
            let (Some(&from), Some(&to)) = (from, to) else {
                warn(&mut feed, format!("transfers.txt:{}: unknown stop, row dropped", line + 2));
                continue;
            };
            let min_time = f_time.and_then(|c| field(row, c).parse().ok());
            feed.transfers.push(GivenTransfer { from, to, min_time });
        }
    }
    Ok(feed)
}

impl Feed {
    /// Stop events of every trip with at least two usable rows. Rows that
    /// would travel back in time are dropped with a warning.
    pub fn trip_events(&self) -> (Vec<(u32, Vec<TripEvent>)>, Vec<String>) {
        let mut warnings = Vec::new();
        let mut out = Vec::new();
        for (trip, times) in self.stop_times.iter().enumerate() {
            let mut events: Vec<TripEvent> = Vec::with_capacity(times.len());
            for st in times {
                let departure = st.departure.max(st.arrival);
                if let Some(prev) = events.last() {
                    if st.arrival < prev.departure {
                        warnings.push(format!("trip {}: stop_sequence {} arrives before the previous departure, dropped", self.trips[trip].id, st.sequence));
                        continue;
                    }
                    if st.stop == prev.stop {
                        warnings.push(format!("trip {}: stop_sequence {} repeats the previous stop, dropped", self.trips[trip].id, st.sequence));
                        continue;
                    }
                }
                events.push(TripEvent { stop: st.stop, arrival: st.arrival, departure });
            }
            if events.len() >= 2 {
                out.push((trip as u32, events));
            }
        }
        (out, warnings)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Self-loops of `buffer` seconds for every stop plus footpaths between all
/// stops connected through chains of stops closer than `radius` meters or
/// given transfers. Given durations are ignored; every footpath between two
/// distinct stops takes `max(buffer, crow-flies distance / walking speed)`
/// seconds, rounded up. The result is transitively closed.
pub fn generate_footpaths(
    stops: &[GeoPoint],
    given: &[(usize, usize)],
    radius: f64,
    buffer: Seconds,
    walk_kmh: f64,
    cap: usize,
) -> Result<Vec<Footpath>, GtfsError> {
    let n = stops.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    let index = PointIndex::build(stops.iter().copied());
    for (a, p) in stops.iter().enumerate() {
        for hit in index.within(p, radius) {
            union(&mut parent, a, hit.item);
        }
    }
    for &(a, b) in given {
        union(&mut parent, a, b);
    }
    let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
    for s in 0..n {
        let root = find(&mut parent, s);
        components.entry(root).or_default().push(s);
    }
    let count = n + components.values().map(|c| c.len() * (c.len() - 1)).sum::<usize>();
    if count > cap {
        return Err(GtfsError::TooManyFootpaths { count, cap });
    }
    let speed = kmh_to_mps(walk_kmh);
    let mut out: Vec<Footpath> = (0..n as u32).map(|s| Footpath { from: s, duration: buffer, to: s }).collect();
    for members in components.values() {
        for &a in members {
            for &b in members {
                if a != b {
                    let walk = (stops[a].distance(&stops[b]) / speed).ceil() as Seconds;
                    out.push(Footpath { from: a as u32, duration: walk.max(buffer), to: b as u32 });
                }
            }
        }
    }
    out.sort_by_key(|f| (f.from, f.to));
    Ok(out)
}

pub fn build_timetable(feed: &Feed, config: &GtfsConfig) -> Result<Timetable, GtfsError> {
    let (events, warnings) = feed.trip_events();
    for w in &warnings {
        log::warn!("{w}");
    }
    let connections = Timetable::connections_of(&events);
    let points: Vec<GeoPoint> = feed.stops.iter().map(|s| s.point).collect();
    let given: Vec<(usize, usize)> = feed.transfers.iter().map(|t| (t.from as usize, t.to as usize)).collect();
    let footpaths =
        generate_footpaths(&points, &given, config.footpath_radius_m, config.buffer, config.walk_kmh, config.max_footpaths)?;
    let trips = feed.trips.iter().map(|t| Trip { id: t.id.clone(), name: t.name.clone() }).collect();
    Ok(Timetable::new(feed.stops.clone(), trips, connections, footpaths))
}

pub fn build_transit_graph(feed: &Feed, config: &GtfsConfig) -> TransitGraph {
    let (events, _) = feed.trip_events();
    let points = feed.stops.iter().map(|s| s.point).collect();
    TransitGraph::build(points, &events, config.transfer_duration())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times() {
        assert_eq!(parse_time("0:06:10"), Some(370));
        assert_eq!(parse_time("16:28:00"), Some(16 * 3600 + 28 * 60));
        assert_eq!(parse_time("25:00:00"), Some(90_000));
        assert_eq!(parse_time("1:60:00"), None);
        assert_eq!(parse_time("abc"), None);
        assert_eq!(parse_time("1:00"), None);
    }

    #[test]
    fn weekend_calendar() {
        let d = |s| NaiveDate::parse_from_str(s, "%Y%m%d").unwrap();
        let we = Calendar {
            service_id: "WE".into(),
            days: [false, false, false, false, false, true, true],
            start: d("20060701"),
            end: d("20060731"),
        };
        // 2006-07-08 is a Saturday
        assert!(we.is_active(d("20060708")));
        assert!(!we.is_active(d("20060710")));
        assert!(!we.is_active(d("20060805")));
    }

    #[test]
    fn isolated_stop_gets_self_loop_only() {
        let p = GeoPoint::from_degrees(48.0, 7.8).unwrap();
        let f = generate_footpaths(&[p], &[], 600.0, 300, 5.0, 100).unwrap();
        assert_eq!(f, vec![Footpath { from: 0, duration: 300, to: 0 }]);
    }

    #[test]
    fn cap_is_enforced() {
        let p = GeoPoint::from_degrees(48.0, 7.8).unwrap();
        let err = generate_footpaths(&[p, p, p], &[], 600.0, 300, 5.0, 5).unwrap_err();
        assert!(matches!(err, GtfsError::TooManyFootpaths { count: 9, cap: 5 }));
    }
}
