//! Versioned JSON snapshots of built models, for fast reloads.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{RoadGraph, Timetable, TransitGraph};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("snapshot version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub road: RoadGraph,
    pub timetable: Timetable,
    pub transit: Option<TransitGraph>,
}

impl Snapshot {
    pub fn new(road: RoadGraph, timetable: Timetable, transit: Option<TransitGraph>) -> Self {
        Snapshot { version: SNAPSHOT_VERSION, road, timetable, transit }
    }

    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        serde_json::to_writer(BufWriter::new(File::create(path)?), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    pub fn from_reader<R: std::io::Read>(r: R) -> Result<Self, SnapshotError> {
        let mut s: Snapshot = serde_json::from_reader(r)?;
        if s.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version { found: s.version, expected: SNAPSHOT_VERSION });
        }
        s.road.reindex();
        Ok(s)
    }
}
