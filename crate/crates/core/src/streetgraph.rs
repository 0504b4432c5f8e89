//! Street-parking graphs and the wireless link relation derived from them.
//!
//! A [`StreetGraph`] holds intersections (candidate FFD sites) and road
//! segments. Parking segments carry sensors at a uniform density; the
//! remaining segments are kept for geometry only.
//!
//! The on-disk form is a JSON document:
//!
//! ```json
//! {
//!   "nodes": [{"id": 0, "x": 0.0, "y": 0.0, "label": "A"}, ...],
//!   "edges": [{"u": 0, "v": 1, "length_m": 100.0, "density_per_m": 0.1, "parking": true}, ...]
//! }
//! ```
//!
//! Every field except `label` is required.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("malformed street graph document: {0}")]
    Malformed(String),
    #[error("duplicate intersection id {0}")]
    DuplicateNode(usize),
    #[error("intersection ids must be contiguous from 0 (missing {0})")]
    NonContiguousIds(usize),
    #[error("intersection {0} has non-finite coordinates")]
    NonFiniteCoordinate(usize),
    #[error("segment {u}-{v} references unknown intersection")]
    UnknownEndpoint { u: usize, v: usize },
    #[error("segment {0}-{0} is a self-loop")]
    SelfLoop(usize),
    #[error("negative length on segment {u}-{v}")]
    NegativeLength { u: usize, v: usize },
    #[error("zero length on segment {u}-{v}")]
    ZeroLength { u: usize, v: usize },
    #[error("negative density on segment {u}-{v}")]
    NegativeDensity { u: usize, v: usize },
    #[error("segment {u}-{v} has sensors but is not a parking segment")]
    DensityWithoutParking { u: usize, v: usize },
    #[error("duplicate segment between {u} and {v}")]
    DuplicateSegment { u: usize, v: usize },
    #[error("graph has no road segments")]
    NoSegments,
    #[error("parking subgraph is disconnected ({0} components)")]
    DisconnectedParking(usize),
    #[error("grid must have at least two intersections")]
    ZeroAreaGrid,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegment {
    /// Endpoints, stored with the smaller id first.
    pub endpoints: (usize, usize),
    pub length_m: f64,
    pub sensor_density_per_m: f64,
    pub has_parking: bool,
}

impl RoadSegment {
    /// The endpoint opposite `node`.
    pub fn other(&self, node: usize) -> usize {
        if self.endpoints.0 == node {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }

    /// Number of whole sensors installed along the segment.
    pub fn sensor_count(&self) -> u64 {
        if !self.has_parking {
            return 0;
        }
        (self.length_m * self.sensor_density_per_m + 1e-9).floor() as u64
    }
}

/// Validated street-parking graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct StreetGraph {
    intersections: Vec<Intersection>,
    segments: Vec<RoadSegment>,
    d_max: f64,
    incident: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphDoc {
    nodes: Vec<Intersection>,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgeDoc {
    u: usize,
    v: usize,
    length_m: f64,
    density_per_m: f64,
    parking: bool,
}

impl StreetGraph {
    /// Validate and assemble a graph. `segments` endpoints may be given in
    /// either order.
    pub fn new(
        mut intersections: Vec<Intersection>,
        segments: Vec<RoadSegment>,
    ) -> Result<Self, GraphError> {
        intersections.sort_by_key(|n| n.id);
        for (pos, node) in intersections.iter().enumerate() {
            if pos > 0 && intersections[pos - 1].id == node.id {
                return Err(GraphError::DuplicateNode(node.id));
            }
            if node.id != pos {
                return Err(GraphError::NonContiguousIds(pos));
            }
            if !node.x.is_finite() || !node.y.is_finite() {
                return Err(GraphError::NonFiniteCoordinate(node.id));
            }
        }
        let n = intersections.len();
        if segments.is_empty() {
            return Err(GraphError::NoSegments);
        }

        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(segments.len());
        let mut incident = vec![Vec::new(); n];
        for seg in segments {
            let (u, v) = seg.endpoints;
            if u >= n || v >= n {
                return Err(GraphError::UnknownEndpoint { u, v });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if seg.length_m.is_nan() || seg.length_m < 0.0 {
                return Err(GraphError::NegativeLength { u, v });
            }
            if seg.length_m == 0.0 || !seg.length_m.is_finite() {
                return Err(GraphError::ZeroLength { u, v });
            }
            if seg.sensor_density_per_m.is_nan()
                || seg.sensor_density_per_m < 0.0
                || !seg.sensor_density_per_m.is_finite()
            {
                return Err(GraphError::NegativeDensity { u, v });
            }
            if !seg.has_parking && seg.sensor_density_per_m > 0.0 {
                return Err(GraphError::DensityWithoutParking { u, v });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateSegment { u: key.0, v: key.1 });
            }
            incident[key.0].push(normalized.len());
            incident[key.1].push(normalized.len());
            normalized.push(RoadSegment {
                endpoints: key,
                ..seg
            });
        }

        let d_max = normalized
            .iter()
            .map(|s| s.length_m)
            .fold(0.0_f64, f64::max);
        let graph = StreetGraph {
            intersections,
            segments: normalized,
            d_max,
            incident,
        };
        let parking_components = graph.parking_component_count();
        if parking_components > 1 {
            return Err(GraphError::DisconnectedParking(parking_components));
        }
        Ok(graph)
    }

    pub fn intersections(&self) -> &[Intersection] {
        &self.intersections
    }

    pub fn segments(&self) -> &[RoadSegment] {
        &self.segments
    }

    pub fn node_count(&self) -> usize {
        self.intersections.len()
    }

    /// Longest segment length; the normalizer for the FFD-presence constraint.
    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Indices into [`segments`](Self::segments) of the segments touching `node`.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incident[node]
    }

    pub fn parking_segments(&self) -> impl Iterator<Item = (usize, &RoadSegment)> {
        self.segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.has_parking)
    }

    /// Segment index joining `u` and `v`, if any.
    pub fn segment_between(&self, u: usize, v: usize) -> Option<usize> {
        self.incident
            .get(u)?
            .iter()
            .copied()
            .find(|&s| self.segments[s].other(u) == v)
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        let a = &self.intersections[u];
        let b = &self.intersections[v];
        (a.x - b.x).hypot(a.y - b.y)
    }

    fn parking_component_count(&self) -> usize {
        let n = self.node_count();
        let mut touched = vec![false; n];
        for (_, s) in self.parking_segments() {
            touched[s.endpoints.0] = true;
            touched[s.endpoints.1] = true;
        }
        let mut visited = vec![false; n];
        let mut components = 0;
        for start in 0..n {
            if !touched[start] || visited[start] {
                continue;
            }
            components += 1;
            visited[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &s in &self.incident[u] {
                    let seg = &self.segments[s];
                    if !seg.has_parking {
                        continue;
                    }
                    let v = seg.other(u);
                    if !visited[v] {
                        visited[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            nodes: self.intersections.clone(),
            edges: self
                .segments
                .iter()
                .map(|s| EdgeDoc {
                    u: s.endpoints.0,
                    v: s.endpoints.1,
                    length_m: s.length_m,
                    density_per_m: s.sensor_density_per_m,
                    parking: s.has_parking,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph document serializes")
    }
}

/// Parse and validate a street graph document.
pub fn parse_street_graph(text: &str) -> Result<StreetGraph, GraphError> {
    let doc: GraphDoc =
        serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
    let segments = doc
        .edges
        .into_iter()
        .map(|e| RoadSegment {
            endpoints: (e.u, e.v),
            length_m: e.length_m,
            sensor_density_per_m: e.density_per_m,
            has_parking: e.parking,
        })
        .collect();
    StreetGraph::new(doc.nodes, segments)
}

/// A `rows` x `cols` lattice where every lattice edge is a parking segment.
pub fn gen_grid(
    rows: usize,
    cols: usize,
    edge_len_m: f64,
    density_per_m: f64,
) -> Result<StreetGraph, GraphError> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(GraphError::ZeroAreaGrid);
    }
    if !(edge_len_m > 0.0) || !edge_len_m.is_finite() {
        return Err(GraphError::InvalidParameter(format!(
            "edge length must be positive, got {edge_len_m}"
        )));
    }
    if !(density_per_m >= 0.0) || !density_per_m.is_finite() {
        return Err(GraphError::InvalidParameter(format!(
            "density must be nonnegative, got {density_per_m}"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let nodes = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| Intersection {
            id: id(r, c),
            x: c as f64 * edge_len_m,
            y: r as f64 * edge_len_m,
            label: None,
        })
        .collect();
    let mut segments = Vec::new();
    let seg = |u, v| RoadSegment {
        endpoints: (u, v),
        length_m: edge_len_m,
        sensor_density_per_m: density_per_m,
        has_parking: true,
    };
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                segments.push(seg(id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                segments.push(seg(id(r, c), id(r + 1, c)));
            }
        }
    }
    StreetGraph::new(nodes, segments)
}

/// Displace every intersection uniformly within `±jitter_m` on each axis.
/// Segment lengths are left untouched; only link derivation sees the shift.
pub fn jitter_coordinates<R: Rng>(g: &StreetGraph, jitter_m: f64, rng: &mut R) -> StreetGraph {
    if jitter_m <= 0.0 {
        return g.clone();
    }
    let nodes = g
        .intersections
        .iter()
        .map(|n| Intersection {
            x: n.x + rng.gen_range(-jitter_m..=jitter_m),
            y: n.y + rng.gen_range(-jitter_m..=jitter_m),
            ..n.clone()
        })
        .collect();
    StreetGraph::new(nodes, g.segments.clone()).expect("jitter preserves validity")
}

/// Symmetric, irreflexive radio-feasibility relation over intersections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WirelessLinkSet {
    neighbors: Vec<Vec<usize>>,
}

impl WirelessLinkSet {
    /// Build from an undirected pair list. Self pairs are dropped.
    pub fn from_pairs(node_count: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut sets = vec![BTreeSet::new(); node_count];
        for (u, v) in pairs {
            if u != v {
                sets[u].insert(v);
                sets[v].insert(u);
            }
        }
        WirelessLinkSet {
            neighbors: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn linked(&self, u: usize, v: usize) -> bool {
        self.neighbors
            .get(u)
            .is_some_and(|ns| ns.binary_search(&v).is_ok())
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[u]
    }

    /// Number of undirected links.
    pub fn link_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected links as `(u, v)` with `u < v`, in ascending order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }
}

/// How the wireless link set is derived from a street graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LinkMode {
    /// Link every pair of intersections within `radio_range_m` of each other.
    Distance { radio_range_m: f64 },
    /// Link only intersections joined by a road segment.
    Street,
}

impl fmt::Display for LinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkMode::Distance { radio_range_m } => write!(f, "distance<={radio_range_m}m"),
            LinkMode::Street => f.write_str("street"),
        }
    }
}

impl LinkMode {
    pub fn derive(&self, g: &StreetGraph) -> Result<WirelessLinkSet, GraphError> {
        match *self {
            LinkMode::Distance { radio_range_m } => derive_wireless_links(g, radio_range_m),
            LinkMode::Street => Ok(street_links(g)),
        }
    }
}

/// Link `i` and `j` iff their Euclidean distance is at most `radio_range_m`.
pub fn derive_wireless_links(
    g: &StreetGraph,
    radio_range_m: f64,
) -> Result<WirelessLinkSet, GraphError> {
    if !(radio_range_m > 0.0) {
        return Err(GraphError::InvalidParameter(format!(
            "radio range must be positive, got {radio_range_m}"
        )));
    }
    let n = g.node_count();
    let pairs = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| g.distance(u, v) <= radio_range_m + 1e-9);
    Ok(WirelessLinkSet::from_pairs(n, pairs))
}

/// Link intersections that share a road segment.
pub fn street_links(g: &StreetGraph) -> WirelessLinkSet {
    WirelessLinkSet::from_pairs(g.node_count(), g.segments().iter().map(|s| s.endpoints))
}

/// Partition `active` into groups mutually reachable through links whose
/// endpoints are both active. Blocks are sorted, ordered by smallest member.
pub fn connected_components(w: &WirelessLinkSet, active: &BTreeSet<usize>) -> Vec<Vec<usize>> {
    let mut seen = BTreeSet::new();
    let mut blocks = Vec::new();
    for &start in active {
        if !seen.insert(start) {
            continue;
        }
        let mut block = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in w.neighbors(u) {
                if active.contains(&v) && seen.insert(v) {
                    block.push(v);
                    queue.push_back(v);
                }
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(len: f64) -> String {
        format!(
            r#"{{"nodes":[{{"id":0,"x":0,"y":0}},{{"id":1,"x":100,"y":0}}],
                "edges":[{{"u":0,"v":1,"length_m":{len},"density_per_m":0.1,"parking":true}}]}}"#
        )
    }

    #[test]
    fn parses_single_edge() {
        let g = parse_street_graph(&doc(100.0)).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.segments().len(), 1);
        assert_eq!(g.d_max(), 100.0);
        assert_eq!(g.segments()[0].sensor_count(), 10);
    }

    #[test]
    fn rejects_negative_length() {
        let err = parse_street_graph(&doc(-5.0)).unwrap_err();
        assert_eq!(err, GraphError::NegativeLength { u: 0, v: 1 });
        assert!(err.to_string().contains("negative length"));
    }

    #[test]
    fn rejects_bad_documents() {
        let missing_len = r#"{"nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],
            "edges":[{"u":0,"v":1,"density_per_m":0.1,"parking":true}]}"#;
        assert!(matches!(
            parse_street_graph(missing_len),
            Err(GraphError::Malformed(_))
        ));

        let dup = r#"{"nodes":[{"id":0,"x":0,"y":0},{"id":0,"x":1,"y":0}],
            "edges":[{"u":0,"v":1,"length_m":1,"density_per_m":0.1,"parking":true}]}"#;
        assert_eq!(parse_street_graph(dup).unwrap_err(), GraphError::DuplicateNode(0));

        let self_loop = r#"{"nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],
            "edges":[{"u":1,"v":1,"length_m":1,"density_per_m":0.1,"parking":true}]}"#;
        assert_eq!(parse_street_graph(self_loop).unwrap_err(), GraphError::SelfLoop(1));

        let neg_density = r#"{"nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],
            "edges":[{"u":0,"v":1,"length_m":1,"density_per_m":-0.1,"parking":true}]}"#;
        assert!(matches!(
            parse_street_graph(neg_density),
            Err(GraphError::NegativeDensity { .. })
        ));

        let disconnected = r#"{"nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},
                {"id":2,"x":5,"y":0},{"id":3,"x":6,"y":0}],
            "edges":[{"u":0,"v":1,"length_m":1,"density_per_m":0.1,"parking":true},
                     {"u":2,"v":3,"length_m":1,"density_per_m":0.1,"parking":true}]}"#;
        assert_eq!(
            parse_street_graph(disconnected).unwrap_err(),
            GraphError::DisconnectedParking(2)
        );

        let duplicate_segment = r#"{"nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],
            "edges":[{"u":0,"v":1,"length_m":1,"density_per_m":0.1,"parking":true},
                     {"u":1,"v":0,"length_m":2,"density_per_m":0.1,"parking":true}]}"#;
        assert!(matches!(
            parse_street_graph(duplicate_segment),
            Err(GraphError::DuplicateSegment { u: 0, v: 1 })
        ));
    }

    #[test]
    fn non_parking_segment_keeps_geometry() {
        let text = r#"{"nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},{"id":2,"x":2,"y":0}],
            "edges":[{"u":0,"v":1,"length_m":10,"density_per_m":0.1,"parking":true},
                     {"u":1,"v":2,"length_m":30,"density_per_m":0,"parking":false}]}"#;
        let g = parse_street_graph(text).unwrap();
        assert_eq!(g.d_max(), 30.0);
        assert_eq!(g.parking_segments().count(), 1);
        assert_eq!(g.segments()[1].sensor_count(), 0);
    }

    #[test]
    fn grid_shapes() {
        let g = gen_grid(2, 2, 100.0, 0.1).unwrap();
        assert_eq!((g.node_count(), g.segments().len()), (4, 4));
        assert_eq!(g.d_max(), 100.0);
        let g = gen_grid(1, 3, 50.0, 0.2).unwrap();
        assert_eq!((g.node_count(), g.segments().len()), (3, 2));
        let g = gen_grid(5, 5, 100.0, 0.1).unwrap();
        assert_eq!((g.node_count(), g.segments().len()), (25, 40));
        assert_eq!(gen_grid(1, 1, 1.0, 0.1).unwrap_err(), GraphError::ZeroAreaGrid);
        assert_eq!(gen_grid(0, 4, 1.0, 0.1).unwrap_err(), GraphError::ZeroAreaGrid);
    }

    #[test]
    fn wireless_links_by_range() {
        let g = gen_grid(2, 2, 100.0, 0.1).unwrap();
        assert_eq!(derive_wireless_links(&g, 100.0).unwrap().link_count(), 4);
        let w = derive_wireless_links(&g, 150.0).unwrap();
        assert_eq!(w.link_count(), 6);
        assert!(w.linked(0, 3) && w.linked(1, 2));
        assert_eq!(derive_wireless_links(&g, 99.0).unwrap().link_count(), 0);
        assert!(derive_wireless_links(&g, 0.0).is_err());
        assert_eq!(street_links(&g).link_count(), 4);
    }

    #[test]
    fn components_examples() {
        let w = WirelessLinkSet::from_pairs(4, [(0, 1), (2, 3)]);
        let all: BTreeSet<_> = (0..4).collect();
        assert_eq!(connected_components(&w, &all), vec![vec![0, 1], vec![2, 3]]);

        let w = WirelessLinkSet::from_pairs(3, [(0, 1), (1, 2)]);
        let ends: BTreeSet<_> = [0, 2].into();
        assert_eq!(connected_components(&w, &ends), vec![vec![0], vec![2]]);

        let w = WirelessLinkSet::from_pairs(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(connected_components(&w, &all).len(), 1);
    }
}
