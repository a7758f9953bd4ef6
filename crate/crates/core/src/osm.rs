//! Road graphs from OSM XML.
//!
//! The input is read twice: first the ways, which are filtered by tag, then
//! the nodes, of which only those referenced by a kept way survive. Relations
//! are ignored.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Cursor, Seek, SeekFrom};
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::model::{RoadGraph, RoadGraphBuilder, TransportMode};

#[derive(Debug, Error)]
pub enum OsmError {
    #[error("XML error at byte {position}: {message}")]
    Xml { position: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("filter line {line}: {message}")]
    Filter { line: usize, message: String },
}

const DEFAULT_FILTER: &str = "--KEEP

#highways
highway=motorway
highway=trunk
highway=primary
highway=secondary
highway=tertiary
highway=residential
highway=living_street
highway=unclassified
highway=cycleway

#highwaylinks
highway=motorway_link
highway=trunk_link
highway=primary_link
highway=secondary_link
highway=tertiary_link
highway=residential_link

#non-standard
way=primary
way=seconday

--DROP

area=yes
train=yes
access=no
type=multipolygon
railway=platform
railway=station
highway=proposed
highway=construction
building=yes
building=train_station
";

/// Keep/drop rule for ways: a way passes iff it carries at least one `keep`
/// pair and no `drop` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OsmFilter {
    pub keep: HashSet<(String, String)>,
    pub drop: HashSet<(String, String)>,
}

impl Default for OsmFilter {
    fn default() -> Self {
        OsmFilter::parse(DEFAULT_FILTER).expect("built-in filter parses")
    }
}

impl OsmFilter {
    /// Parses the filter file format: `--KEEP` and `--DROP` section headers,
    /// `key=value` lines, `#` comments and blank lines.
    pub fn parse(text: &str) -> Result<Self, OsmError> {
        let mut keep = HashSet::new();
        let mut drop = HashSet::new();
        let mut section: Option<bool> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "--KEEP" => section = Some(true),
                "--DROP" => section = Some(false),
                _ => {
                    let err = |message: &str| OsmError::Filter { line: i + 1, message: message.into() };
                    let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value"))?;
                    let pair = (k.trim().to_string(), v.trim().to_string());
                    match section {
                        Some(true) => keep.insert(pair),
                        Some(false) => drop.insert(pair),
                        None => return Err(err("pair outside of a --KEEP or --DROP section")),
                    };
                }
            }
        }
        Ok(OsmFilter { keep, drop })
    }

    pub fn from_file(path: &Path) -> Result<Self, OsmError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn filter_way<'a, I>(&self, tags: I) -> bool
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut kept = false;
        for (k, v) in tags {
            let pair = (k.to_string(), v.to_string());
            if self.drop.contains(&pair) {
                return false;
            }
            kept |= self.keep.contains(&pair);
        }
        kept
    }
}

/// Free function form of [`OsmFilter::filter_way`].
pub fn filter_way(tags: &HashMap<String, String>, filter: &OsmFilter) -> bool {
    filter.filter_way(tags.iter().map(|(k, v)| (k.as_str(), v.as_str())))
}

/// Average car speed in km/h per `highway` value.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedTable(pub HashMap<String, f64>);

impl Default for SpeedTable {
    fn default() -> Self {
        let rows = [
            ("motorway", 120.0),
            ("trunk", 110.0),
            ("primary", 100.0),
            ("secondary", 80.0),
            ("tertiary", 70.0),
            ("motorway_link", 50.0),
            ("trunk_link", 50.0),
            ("primary_link", 50.0),
            ("secondary_link", 50.0),
            ("residential", 50.0),
            ("unclassified", 40.0),
            ("unsurfaced", 30.0),
            ("road", 20.0),
            ("cycleway", 14.0),
            ("living_street", 7.0),
            ("service", 7.0),
        ];
        SpeedTable(rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

impl SpeedTable {
    pub fn get(&self, highway: &str) -> Option<f64> {
        self.0.get(highway).copied()
    }
}

pub const BIKE_KMH: f64 = 14.0;
pub const FOOT_KMH: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct OsmConfig {
    pub filter: OsmFilter,
    pub speeds: SpeedTable,
    /// Car speed for ways whose highway value is not in the table and that have no maxspeed.
    pub fallback_kmh: f64,
}

impl Default for OsmConfig {
    fn default() -> Self {
        OsmConfig { filter: OsmFilter::default(), speeds: SpeedTable::default(), fallback_kmh: 40.0 }
    }
}

#[derive(Debug)]
pub struct OsmOutput {
    pub graph: RoadGraph,
    pub warnings: Vec<String>,
    pub kept_ways: usize,
}

/// Modes permitted on a way, by highway class.
pub fn way_modes(highway: Option<&str>) -> &'static [TransportMode] {
    use TransportMode::*;
    match highway {
        Some("cycleway") => &[Foot, Bike],
        Some("motorway" | "motorway_link" | "trunk" | "trunk_link") => &[Car],
        _ => &[Foot, Bike, Car],
    }
}

/// Numeric `maxspeed` values in km/h; anything else is ignored.
fn parse_maxspeed(v: &str) -> Option<f64> {
    v.trim().parse::<f64>().ok().filter(|s| s.is_finite() && *s > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Both,
    Forward,
    Backward,
}

struct Way {
    id: i64,
    refs: Vec<i64>,
    direction: Direction,
    car_kmh: f64,
    modes: &'static [TransportMode],
    name: Option<String>,
}

fn xml_error(reader: &Reader<impl BufRead>, e: impl std::fmt::Display) -> OsmError {
    OsmError::Xml { position: reader.error_position(), message: e.to_string() }
}

fn attr(reader: &Reader<impl BufRead>, e: &BytesStart, key: &[u8]) -> Result<Option<String>, OsmError> {
    match e.try_get_attribute(key).map_err(|err| xml_error(reader, err))? {
        Some(a) => Ok(Some(a.unescape_value().map_err(|err| xml_error(reader, err))?.into_owned())),
        None => Ok(None),
    }
}

fn parse_id(reader: &Reader<impl BufRead>, e: &BytesStart, key: &[u8]) -> Result<i64, OsmError> {
    let v = attr(reader, e, key)?.ok_or_else(|| xml_error(reader, format!("missing attribute {}", String::from_utf8_lossy(key))))?;
    v.trim().parse().map_err(|_| xml_error(reader, format!("bad id {v:?}")))
}

fn read_ways<R: BufRead>(input: R, config: &OsmConfig, warnings: &mut Vec<String>) -> Result<Vec<Way>, OsmError> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut ways = Vec::new();
    let mut current: Option<(i64, Vec<i64>, Vec<(String, String)>)> = None;
    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| xml_error(&reader, e))?;
        match event {
            Event::Eof => break,
            Event::Start(e) if e.name().as_ref() == b"way" => {
                current = Some((parse_id(&reader, &e, b"id")?, Vec::new(), Vec::new()));
            }
            Event::Empty(e) if e.name().as_ref() == b"way" => {
                // a way without nodes yields no edges
                let _ = parse_id(&reader, &e, b"id")?;
            }
            Event::Start(e) | Event::Empty(e) if current.is_some() => {
                let (_, refs, tags) = current.as_mut().unwrap();
                match e.name().as_ref() {
                    b"nd" => refs.push(parse_id(&reader, &e, b"ref")?),
                    b"tag" => {
                        let k = attr(&reader, &e, b"k")?.unwrap_or_default();
                        let v = attr(&reader, &e, b"v")?.unwrap_or_default();
                        tags.push((k, v));
                    }
                    _ => {}
                }
            }
            Event::End(e) if e.name().as_ref() == b"way" => {
                let (id, refs, tags) = current.take().expect("way end after way start");
                if let Some(way) = make_way(id, refs, &tags, config, warnings) {
                    ways.push(way);
                }
            }
            _ => {}
        }
        buf.clear();
    }
    Ok(ways)
}

fn make_way(
    id: i64,
    refs: Vec<i64>,
    tags: &[(String, String)],
    config: &OsmConfig,
    warnings: &mut Vec<String>,
) -> Option<Way> {
    if !config.filter.filter_way(tags.iter().map(|(k, v)| (k.as_str(), v.as_str()))) {
        return None;
    }
    let tag = |key: &str| tags.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let highway = tag("highway");
    let direction = match tag("oneway") {
        Some("yes" | "true" | "1") => Direction::Forward,
        Some("-1") => Direction::Backward,
        _ => Direction::Both,
    };
    let car_kmh = match tag("maxspeed").and_then(parse_maxspeed) {
        Some(s) => s,
        None => match highway.and_then(|h| config.speeds.get(h)) {
            Some(s) => s,
            None => {
                warnings.push(format!(
                    "way {id}: no speed for highway={}, using {} km/h",
                    highway.unwrap_or("<none>"),
                    config.fallback_kmh
                ));
                config.fallback_kmh
            }
        },
    };
    Some(Way { id, refs, direction, car_kmh, modes: way_modes(highway), name: tag("name").map(str::to_string) })
}

fn read_nodes<R: BufRead>(input: R, wanted: &HashSet<i64>) -> Result<Vec<(i64, GeoPoint)>, OsmError> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut nodes = Vec::new();
    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| xml_error(&reader, e))?;
        match event {
            Event::Eof => break,
            Event::Start(e) | Event::Empty(e) if e.name().as_ref() == b"node" => {
                let id = parse_id(&reader, &e, b"id")?;
                if wanted.contains(&id) {
                    let coord = |key: &[u8]| -> Result<f64, OsmError> {
                        let v = attr(&reader, &e, key)?.ok_or_else(|| xml_error(&reader, format!("node {id} lacks a coordinate")))?;
                        v.trim().parse().map_err(|_| xml_error(&reader, format!("node {id}: bad coordinate {v:?}")))
                    };
                    let point = GeoPoint::from_degrees(coord(b"lat")?, coord(b"lon")?)
                        .map_err(|err| xml_error(&reader, format!("node {id}: {err}")))?;
                    nodes.push((id, point));
                }
            }
            _ => {}
        }
        buf.clear();
    }
    Ok(nodes)
}

/// Builds a road graph from a seekable OSM XML stream.
pub fn parse_osm<R: BufRead + Seek>(mut input: R, config: &OsmConfig) -> Result<OsmOutput, OsmError> {
    let mut warnings = Vec::new();
    let ways = read_ways(&mut input, config, &mut warnings)?;
    let wanted: HashSet<i64> = ways.iter().flat_map(|w| w.refs.iter().copied()).collect();
    input.seek(SeekFrom::Start(0))?;
    let nodes = read_nodes(&mut input, &wanted)?;

    let mut b = RoadGraphBuilder::new();
    for (id, point) in nodes {
        if b.add_node(id, point).is_err() {
            warnings.push(format!("node {id} defined twice, keeping the first"));
        }
    }
    for way in &ways {
        let bike = BIKE_KMH.min(way.car_kmh);
        let foot = FOOT_KMH.min(way.car_kmh);
        let speeds: Vec<(TransportMode, f64)> = way
            .modes
            .iter()
            .map(|&m| match m {
                TransportMode::Car => (m, way.car_kmh),
                TransportMode::Bike => (m, bike),
                _ => (m, foot),
            })
            .collect();
        for pair in way.refs.windows(2) {
            let (Some(u), Some(v)) = (b.index_of(pair[0]), b.index_of(pair[1])) else {
                warnings.push(format!("way {}: segment {} -> {} references an undefined node", way.id, pair[0], pair[1]));
                continue;
            };
            let name = way.name.as_deref();
            if way.direction != Direction::Backward {
                b.add_road(u, v, &speeds, name).expect("valid nodes and speeds");
            }
            if way.direction != Direction::Forward {
                b.add_road(v, u, &speeds, name).expect("valid nodes and speeds");
            }
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(OsmOutput { graph: b.build(), warnings, kept_ways: ways.len() })
}

pub fn parse_osm_str(xml: &str, config: &OsmConfig) -> Result<OsmOutput, OsmError> {
    parse_osm(Cursor::new(xml.as_bytes()), config)
}

pub fn parse_osm_file(path: &Path, config: &OsmConfig) -> Result<OsmOutput, OsmError> {
    parse_osm(BufReader::new(File::open(path)?), config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn filter_rules() {
        let f = OsmFilter::default();
        assert_eq!(f.keep.len(), 17);
        assert_eq!(f.drop.len(), 10);
        assert!(filter_way(&tags(&[("highway", "motorway"), ("oneway", "yes")]), &f));
        assert!(!filter_way(&tags(&[("highway", "motorway"), ("building", "yes")]), &f));
        assert!(!filter_way(&tags(&[]), &f));
    }

    #[test]
    fn filter_file_errors() {
        assert!(OsmFilter::parse("highway=primary").is_err());
        assert!(OsmFilter::parse("--KEEP\nhighway").is_err());
        let f = OsmFilter::parse("# x\n--KEEP\n a = b \n--DROP\nc=d").unwrap();
        assert!(f.keep.contains(&("a".into(), "b".into())));
    }

    #[test]
    fn speed_table_rows() {
        let t = SpeedTable::default();
        assert_eq!(t.0.len(), 16);
        assert_eq!(t.get("motorway"), Some(120.0));
        assert_eq!(t.get("service"), Some(7.0));
    }

    #[test]
    fn two_way_street() {
        let xml = r#"<osm>
            <node id="1" lat="48.0" lon="7.8"/>
            <node id="2" lat="48.001" lon="7.8"/>
            <way id="9"><nd ref="1"/><nd ref="2"/><tag k="highway" v="residential"/><tag k="name" v="Hauptstraße"/></way>
        </osm>"#;
        let out = parse_osm_str(xml, &OsmConfig::default()).unwrap();
        let g = out.graph;
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 2);
        let (a, b) = (&g.edges()[0], &g.edges()[1]);
        assert_eq!(a.distance, b.distance);
        assert_eq!(a.speed(TransportMode::Car), Some(50.0));
        assert_eq!(a.speed(TransportMode::Bike), Some(14.0));
        assert_eq!(a.speed(TransportMode::Foot), Some(5.0));
        assert_eq!(g.name(a.name.unwrap()), "Hauptstraße");
    }

    #[test]
    fn maxspeed_reverse_and_fallback() {
        let xml = r#"<osm>
            <node id="1" lat="48.0" lon="7.8"/>
            <node id="2" lat="48.001" lon="7.8"/>
            <way id="9"><nd ref="1"/><nd ref="2"/><nd ref="3"/>
              <tag k="highway" v="primary"/><tag k="maxspeed" v="30"/><tag k="oneway" v="-1"/></way>
            <way id="10"><nd ref="1"/><nd ref="2"/><tag k="way" v="primary"/><tag k="maxspeed" v="walk"/></way>
        </osm>"#;
        let out = parse_osm_str(xml, &OsmConfig::default()).unwrap();
        let g = out.graph;
        assert_eq!(g.edge_count(), 3);
        let reverse: Vec<_> = g.out_edges(1).iter().filter(|e| e.speed(TransportMode::Car) == Some(30.0)).collect();
        assert_eq!(reverse.len(), 1);
        assert_eq!(out.warnings.len(), 2, "{:?}", out.warnings);
    }

    #[test]
    fn malformed_xml() {
        let err = parse_osm_str("<osm><way id=\"1\"></osm>", &OsmConfig::default()).unwrap_err();
        assert!(matches!(err, OsmError::Xml { .. }), "{err}");
    }

    #[test]
    fn empty_document() {
        let out = parse_osm_str("<osm></osm>", &OsmConfig::default()).unwrap();
        assert!(out.graph.is_empty());
    }
}
