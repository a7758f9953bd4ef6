//! Connection scan: earliest arrival queries on a timetable.

use thiserror::Error;

use crate::model::{Connection, Footpath, Seconds, Timetable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CsaError {
    #[error("stop {stop} not in timetable with {count} stops")]
    InvalidStop { stop: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Leg {
    /// A ride on one trip over consecutive connections.
    Trip { trip: u32, connections: Vec<Connection> },
    Footpath(Footpath),
}

impl Leg {
    pub fn from_stop(&self) -> u32 {
        match self {
            Leg::Trip { connections, .. } => connections[0].dep_stop,
            Leg::Footpath(f) => f.from,
        }
    }

    pub fn to_stop(&self) -> u32 {
        match self {
            Leg::Trip { connections, .. } => connections[connections.len() - 1].arr_stop,
            Leg::Footpath(f) => f.to,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Journey {
    pub legs: Vec<Leg>,
    pub departure: Seconds,
    pub arrival: Seconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsaOptions {
    /// Count the target's self-loop footpath into the arrival time. When
    /// false, a trailing self-loop at the target is dropped from the journey
    /// and the arrival is the moment the target is reached.
    pub include_target_transfer: bool,
}

impl Default for CsaOptions {
    fn default() -> Self {
        CsaOptions { include_target_transfer: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsaResult {
    pub journey: Option<Journey>,
    /// Connections inspected by the scan.
    pub scanned: usize,
}

impl CsaResult {
    pub fn arrival(&self) -> Option<Seconds> {
        self.journey.as_ref().map(|j| j.arrival)
    }
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Label {
    enter: u32,
    exit: u32,
    footpath: Option<Footpath>,
}

/// Earliest arrival from `s` to `t` departing at `tau`, with default options.
pub fn csa_query(tt: &Timetable, s: usize, t: usize, tau: Seconds) -> Result<CsaResult, CsaError> {
    csa_query_with(tt, s, t, tau, CsaOptions::default())
}

pub fn csa_query_with(tt: &Timetable, s: usize, t: usize, tau: Seconds, opts: CsaOptions) -> Result<CsaResult, CsaError> {
    let count = tt.stops().len();
    for stop in [s, t] {
        if stop >= count {
            return Err(CsaError::InvalidStop { stop, count });
        }
    }
    let conns = tt.connections();
    let mut arrival = vec![Seconds::MAX; count];
    let mut trip_entry = vec![NONE; tt.trips().len()];
    let mut labels = vec![Label { enter: NONE, exit: NONE, footpath: None }; count];

    for f in tt.footpaths_from(s) {
        let at = tau.saturating_add(f.duration);
        if at < arrival[f.to as usize] {
            arrival[f.to as usize] = at;
            labels[f.to as usize] = Label { enter: NONE, exit: NONE, footpath: Some(*f) };
        }
    }

    let first = conns.partition_point(|c| c.dep_time < tau);
    let mut scanned = 0;
    for (i, c) in conns.iter().enumerate().skip(first) {
        if c.dep_time >= arrival[t] {
            break;
        }
        scanned += 1;
        let trip = c.trip as usize;
        if trip_entry[trip] == NONE && c.dep_time < arrival[c.dep_stop as usize] {
            continue;
        }
        if trip_entry[trip] == NONE {
            trip_entry[trip] = i as u32;
        }
        if c.arr_time < arrival[c.arr_stop as usize] {
            for f in tt.footpaths_from(c.arr_stop as usize) {
                let at = c.arr_time.saturating_add(f.duration);
                if at < arrival[f.to as usize] {
                    arrival[f.to as usize] = at;
                    labels[f.to as usize] = Label { enter: trip_entry[trip], exit: i as u32, footpath: Some(*f) };
                }
            }
        }
    }

    if arrival[t] == Seconds::MAX {
        return Ok(CsaResult { journey: None, scanned });
    }

    // Backtrack from t. Each step moves to the stop where a strictly earlier
    // trip segment was entered, so at most `count` steps are needed.
    let mut legs = Vec::new();
    let mut u = t;
    for _ in 0..=count {
        let label = labels[u];
        let Some(f) = label.footpath else { break };
        legs.push(Leg::Footpath(f));
        if label.enter == NONE {
            break;
        }
        let enter = conns[label.enter as usize];
        let segment: Vec<Connection> = conns[label.enter as usize..=label.exit as usize]
            .iter()
            .filter(|c| c.trip == enter.trip)
            .copied()
            .collect();
        legs.push(Leg::Trip { trip: enter.trip, connections: segment });
        u = enter.dep_stop as usize;
    }
    legs.reverse();

    let mut arrival_at_t = arrival[t];
    if !opts.include_target_transfer {
        if let Some(Leg::Footpath(f)) = legs.last() {
            if f.from == f.to && f.to as usize == t {
                arrival_at_t -= f.duration;
                legs.pop();
            }
        }
    }
    Ok(CsaResult { journey: Some(Journey { legs, departure: tau, arrival: arrival_at_t }), scanned })
}
