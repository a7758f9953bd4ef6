use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Seconds, TripEvent};
use crate::geo::GeoPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    /// Feed identifier, e.g. GTFS `stop_id`.
    pub id: String,
    pub name: String,
    pub point: GeoPoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trip {
    pub id: String,
    /// Human readable line name when the feed provides one.
    pub name: Option<String>,
}

/// A vehicle driving from one stop to the next without intermediate stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub dep_stop: u32,
    pub arr_stop: u32,
    pub dep_time: Seconds,
    pub arr_time: Seconds,
    pub trip: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Footpath {
    pub from: u32,
    pub duration: Seconds,
    pub to: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownStop { connection: Option<Connection>, footpath: Option<Footpath> },
    UnknownTrip(Connection),
    ArrivesBeforeDeparture(Connection),
    SameStop(Connection),
    Unsorted { index: usize },
    MissingSelfLoop { stop: u32 },
    NotClosed { first: Footpath, second: Footpath },
    Triangle { first: Footpath, second: Footpath, direct: Footpath },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownStop { connection: Some(c), .. } => write!(f, "connection {c:?} references an unknown stop"),
            Violation::UnknownStop { footpath, .. } => write!(f, "footpath {footpath:?} references an unknown stop"),
            Violation::UnknownTrip(c) => write!(f, "connection {c:?} references an unknown trip"),
            Violation::ArrivesBeforeDeparture(c) => write!(f, "connection {c:?} arrives before it departs"),
            Violation::SameStop(c) => write!(f, "connection {c:?} departs and arrives at the same stop"),
            Violation::Unsorted { index } => write!(f, "connection {index} departs before its predecessor"),
            Violation::MissingSelfLoop { stop } => write!(f, "stop {stop} has no self-loop footpath"),
            Violation::NotClosed { first, second } => {
                write!(f, "footpaths {first:?} and {second:?} have no direct footpath {} -> {}", first.from, second.to)
            }
            Violation::Triangle { first, second, direct } => {
                write!(f, "footpath {direct:?} is longer than {first:?} followed by {second:?}")
            }
        }
    }
}

/// Stops, trips, connections sorted by departure time and footpaths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timetable {
    stops: Vec<Stop>,
    trips: Vec<Trip>,
    connections: Vec<Connection>,
    footpaths: Vec<Footpath>,
    /// Footpaths grouped by origin stop.
    first_footpath: Vec<u32>,
}

impl Timetable {
    /// Assembles a timetable. Connections are stably sorted by departure time,
    /// footpaths by origin stop. Nothing is validated, see [`Timetable::validate`].
    pub fn new(stops: Vec<Stop>, trips: Vec<Trip>, mut connections: Vec<Connection>, mut footpaths: Vec<Footpath>) -> Self {
        connections.sort_by_key(|c| c.dep_time);
        footpaths.sort_by_key(|f| (f.from, f.to));
        let n = stops.len();
        let mut first_footpath = vec![0u32; n + 1];
        for f in &footpaths {
            if (f.from as usize) < n {
                first_footpath[f.from as usize + 1] += 1;
            }
        }
        for i in 0..n {
            first_footpath[i + 1] += first_footpath[i];
        }
        Timetable { stops, trips, connections, footpaths, first_footpath }
    }

    /// Connections between consecutive events of every trip.
    pub fn connections_of(trips: &[(u32, Vec<TripEvent>)]) -> Vec<Connection> {
        let mut out = Vec::new();
        for (trip, events) in trips {
            for w in events.windows(2) {
                out.push(Connection {
                    dep_stop: w[0].stop,
                    arr_stop: w[1].stop,
                    dep_time: w[0].departure.max(w[0].arrival),
                    arr_time: w[1].arrival,
                    trip: *trip,
                });
            }
        }
        out
    }

    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    pub fn stop(&self, i: usize) -> &Stop {
        &self.stops[i]
    }

    pub fn stop_index(&self, id: &str) -> Option<usize> {
        self.stops.iter().position(|s| s.id == id)
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn footpaths(&self) -> &[Footpath] {
        &self.footpaths
    }

    pub fn footpaths_from(&self, stop: usize) -> &[Footpath] {
        &self.footpaths[self.first_footpath[stop] as usize..self.first_footpath[stop + 1] as usize]
    }

    /// Duration of the stop's self-loop footpath, if any.
    pub fn transfer_time(&self, stop: usize) -> Option<Seconds> {
        self.footpaths_from(stop).iter().filter(|f| f.to as usize == stop).map(|f| f.duration).min()
    }

    /// Checks connection sanity and the three footpath properties: self-loops,
    /// transitive closure and triangle inequality. Empty iff all hold.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.stops.len() as u32;
        let mut out = Vec::new();
        for (i, c) in self.connections.iter().enumerate() {
            if c.dep_stop >= n || c.arr_stop >= n {
                out.push(Violation::UnknownStop { connection: Some(*c), footpath: None });
            }
            if c.trip as usize >= self.trips.len() {
                out.push(Violation::UnknownTrip(*c));
            }
            if c.arr_time < c.dep_time {
                out.push(Violation::ArrivesBeforeDeparture(*c));
            }
            if c.dep_stop == c.arr_stop {
                out.push(Violation::SameStop(*c));
            }
            if i > 0 && self.connections[i - 1].dep_time > c.dep_time {
                out.push(Violation::Unsorted { index: i });
            }
        }
        let mut shortest: HashMap<(u32, u32), Footpath> = HashMap::new();
        for f in &self.footpaths {
            if f.from >= n || f.to >= n {
                out.push(Violation::UnknownStop { connection: None, footpath: Some(*f) });
                continue;
            }
            let e = shortest.entry((f.from, f.to)).or_insert(*f);
            if f.duration < e.duration {
                *e = *f;
            }
        }
        for s in 0..n {
            if !shortest.contains_key(&(s, s)) {
                out.push(Violation::MissingSelfLoop { stop: s });
            }
        }
        for s in 0..self.stops.len() {
            for first in self.footpaths_from(s) {
                for second in self.footpaths_from(first.to as usize) {
                    match shortest.get(&(first.from, second.to)) {
                        None => out.push(Violation::NotClosed { first: *first, second: *second }),
                        Some(direct) if direct.duration > first.duration + second.duration => {
                            out.push(Violation::Triangle { first: *first, second: *second, direct: *direct })
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        out
    }
}
