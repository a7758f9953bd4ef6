//! Geographic coordinates and the equirectangular distance approximation.
//!
//! Coordinates are stored in radians everywhere inside the crate. Degrees only
//! show up at the boundaries (OSM, GTFS and HTTP), see [`GeoPoint::from_degrees`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Approximate mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeoError {
    #[error("latitude {0} rad outside (-pi/2, pi/2)")]
    Latitude(f64),
    #[error("longitude {0} rad outside [-pi, pi)")]
    Longitude(f64),
}

/// A latitude/longitude pair in radians.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct GeoPoint {
    lat: f64,
    lng: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    lat: f64,
    lng: f64,
}

impl TryFrom<RawPoint> for GeoPoint {
    type Error = GeoError;

    fn try_from(raw: RawPoint) -> Result<Self, Self::Error> {
        GeoPoint::new(raw.lat, raw.lng)
    }
}

impl From<GeoPoint> for RawPoint {
    fn from(p: GeoPoint) -> Self {
        RawPoint { lat: p.lat, lng: p.lng }
    }
}

impl GeoPoint {
    /// Builds a point from radians. Out-of-range values are rejected, never wrapped.
    pub fn new(lat: f64, lng: f64) -> Result<Self, GeoError> {
        if !(lat > -FRAC_PI_2 && lat < FRAC_PI_2) {
            return Err(GeoError::Latitude(lat));
        }
        if !(-PI..PI).contains(&lng) {
            return Err(GeoError::Longitude(lng));
        }
        Ok(GeoPoint { lat, lng })
    }

    pub fn from_degrees(lat: f64, lng: f64) -> Result<Self, GeoError> {
        GeoPoint::new(degrees_to_radians(lat), degrees_to_radians(lng))
    }

    #[inline]
    pub fn lat(&self) -> f64 {
        self.lat
    }

    #[inline]
    pub fn lng(&self) -> f64 {
        self.lng
    }

    pub fn lat_degrees(&self) -> f64 {
        radians_to_degrees(self.lat)
    }

    pub fn lng_degrees(&self) -> f64 {
        radians_to_degrees(self.lng)
    }

    /// Shorthand for [`as_the_crow_flies`].
    #[inline]
    pub fn distance(&self, other: &GeoPoint) -> f64 {
        as_the_crow_flies(self, other)
    }
}

impl fmt::Debug for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeoPoint({:.7}°, {:.7}°)", self.lat_degrees(), self.lng_degrees())
    }
}

#[inline]
pub fn degrees_to_radians(deg: f64) -> f64 {
    deg * PI / 180.0
}

#[inline]
pub fn radians_to_degrees(rad: f64) -> f64 {
    rad * 180.0 / PI
}

/// Equirectangular approximation of the distance between two points, in meters.
///
/// Symmetric, non-negative and exactly zero for equal points. Within a few
/// hundred kilometers it stays well inside 1% of the great-circle distance.
#[inline]
pub fn as_the_crow_flies(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let x = (b.lng - a.lng) * ((a.lat + b.lat) / 2.0).cos();
    let y = b.lat - a.lat;
    x.hypot(y) * EARTH_RADIUS_M
}
