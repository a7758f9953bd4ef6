use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Transportation modes, ordered by speed: foot < bike < tram < car.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportMode {
    Foot,
    Bike,
    Tram,
    Car,
}

impl TransportMode {
    pub const ALL: [TransportMode; 4] = [TransportMode::Foot, TransportMode::Bike, TransportMode::Tram, TransportMode::Car];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TransportMode::Foot => "foot",
            TransportMode::Bike => "bike",
            TransportMode::Tram => "tram",
            TransportMode::Car => "car",
        }
    }
}

impl fmt::Display for TransportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown transport mode {0:?}")]
pub struct ParseModeError(pub String);

impl FromStr for TransportMode {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "foot" => Ok(TransportMode::Foot),
            "bike" => Ok(TransportMode::Bike),
            "tram" => Ok(TransportMode::Tram),
            "car" => Ok(TransportMode::Car),
            other => Err(ParseModeError(other.to_string())),
        }
    }
}

/// A set of transport modes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ModeSet(u8);

impl ModeSet {
    pub const EMPTY: ModeSet = ModeSet(0);
    pub const ALL: ModeSet = ModeSet(0b1111);
    /// The modes usable on roads.
    pub const ROAD: ModeSet = ModeSet(0b1011);

    pub const fn single(mode: TransportMode) -> ModeSet {
        ModeSet(1 << mode as u8)
    }

    pub fn of(modes: &[TransportMode]) -> ModeSet {
        modes.iter().copied().collect()
    }

    #[inline]
    pub fn contains(self, mode: TransportMode) -> bool {
        self.0 & (1 << mode as u8) != 0
    }

    pub fn insert(&mut self, mode: TransportMode) {
        self.0 |= 1 << mode as u8;
    }

    #[inline]
    pub fn intersection(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 & other.0)
    }

    pub fn union(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 | other.0)
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// The fastest mode of the set.
    #[inline]
    pub fn fastest(self) -> Option<TransportMode> {
        TransportMode::ALL.into_iter().rev().find(|m| self.contains(*m))
    }

    pub fn iter(self) -> impl Iterator<Item = TransportMode> {
        TransportMode::ALL.into_iter().filter(move |m| self.contains(*m))
    }
}

impl FromIterator<TransportMode> for ModeSet {
    fn from_iter<I: IntoIterator<Item = TransportMode>>(iter: I) -> Self {
        let mut set = ModeSet::EMPTY;
        for m in iter {
            set.insert(m);
        }
        set
    }
}

impl fmt::Debug for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(TransportMode::as_str).collect();
        f.write_str(&names.join(","))
    }
}

/// Parses a comma separated list such as `car,bike`.
impl FromStr for ModeSet {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
    }
}
