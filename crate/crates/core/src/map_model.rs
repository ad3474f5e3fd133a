//! Road network as a directed graph of lane segments.
//!
//! Segments are indexed in lexicographic order of their ids. Consecutive
//! edges are directed predecessor to successor; adjacent and overlapping
//! edges are stored once and traversed in both directions.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::frenet::{Polyline, PolylineError};
use crate::geometry::Vec2;

/// Default gap below which two centerlines are considered overlapping.
pub const DEFAULT_OVERLAP_TOLERANCE: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error("map syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("segment {0:?} is defined more than once")]
    DuplicateSegment(String),
    #[error("segment {segment:?} has a degenerate centerline: {source}")]
    DegenerateCenterline {
        segment: String,
        #[source]
        source: PolylineError,
    },
    #[error("segment {segment:?} has non-positive width {width}")]
    InvalidWidth { segment: String, width: f64 },
    #[error("edge {from:?} -> {to:?} references undefined segment {missing:?}")]
    DanglingEndpoint {
        from: String,
        to: String,
        missing: String,
    },
    #[error("edge {0:?} -> {0:?} is a self-loop")]
    SelfLoop(String),
    #[error("{kind} edge between {from:?} and {to:?} is declared more than once")]
    DuplicateEdge {
        from: String,
        to: String,
        kind: RoadEdgeKind,
    },
    #[error("unknown segment {0:?}")]
    UnknownSegment(String),
}

/// One elementary lane piece.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegment {
    pub id: String,
    /// Centerline in driving direction.
    pub centerline: Polyline,
    pub width: Option<f64>,
    /// Rule annotations; carried through untouched.
    pub regulatory: Option<Vec<serde_json::Value>>,
}

/// A segment as written in a map file, before validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRecord {
    pub id: String,
    pub centerline: Vec<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regulatory: Option<Vec<serde_json::Value>>,
}

impl TryFrom<SegmentRecord> for RoadSegment {
    type Error = MapError;

    fn try_from(r: SegmentRecord) -> Result<Self, MapError> {
        let mut seg = RoadSegment::new(r.id, r.centerline)?;
        seg.width = r.width;
        seg.regulatory = r.regulatory;
        Ok(seg)
    }
}

impl From<&RoadSegment> for SegmentRecord {
    fn from(s: &RoadSegment) -> Self {
        SegmentRecord {
            id: s.id.clone(),
            centerline: s.centerline.points().to_vec(),
            width: s.width,
            regulatory: s.regulatory.clone(),
        }
    }
}

impl RoadSegment {
    pub fn new(id: impl Into<String>, centerline: Vec<Vec2>) -> Result<Self, MapError> {
        let id = id.into();
        let centerline =
            Polyline::new(centerline).map_err(|source| MapError::DegenerateCenterline {
                segment: id.clone(),
                source,
            })?;
        Ok(RoadSegment {
            id,
            centerline,
            width: None,
            regulatory: None,
        })
    }

    pub fn length(&self) -> f64 {
        self.centerline.length()
    }
}

/// Sum of chord lengths of the segment's centerline.
pub fn segment_length(segment: &RoadSegment) -> f64 {
    segment.length()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoadEdgeKind {
    Consecutive,
    Adjacent,
    Overlapping,
}

impl RoadEdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RoadEdgeKind::Consecutive => "consecutive",
            RoadEdgeKind::Adjacent => "adjacent",
            RoadEdgeKind::Overlapping => "overlapping",
        }
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, RoadEdgeKind::Consecutive)
    }
}

impl std::fmt::Display for RoadEdgeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadEdge {
    pub from: String,
    pub to: String,
    pub kind: RoadEdgeKind,
}

impl RoadEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, kind: RoadEdgeKind) -> Self {
        RoadEdge {
            from: from.into(),
            to: to.into(),
            kind,
        }
    }
}

/// On-disk layout of a map file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub segments: Vec<SegmentRecord>,
    #[serde(default)]
    pub edges: Vec<RoadEdge>,
}

/// Validated road graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadGraph {
    segments: Vec<RoadSegment>,
    edges: Vec<RoadEdge>,
    index: HashMap<String, usize>,
    successors: Vec<Vec<usize>>,
    adjacent: Vec<Vec<usize>>,
    overlapping: Vec<Vec<usize>>,
}

impl RoadGraph {
    pub fn new(mut segments: Vec<RoadSegment>, edges: Vec<RoadEdge>) -> Result<Self, MapError> {
        segments.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = segments.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(MapError::DuplicateSegment(w[0].id.clone()));
        }
        for s in &segments {
            if let Some(width) = s.width {
                if !(width.is_finite() && width > 0.0) {
                    return Err(MapError::InvalidWidth {
                        segment: s.id.clone(),
                        width,
                    });
                }
            }
        }
        let index: HashMap<String, usize> = segments
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), i))
            .collect();

        let n = segments.len();
        let mut successors = vec![Vec::new(); n];
        let mut adjacent = vec![Vec::new(); n];
        let mut overlapping = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for e in &edges {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| MapError::DanglingEndpoint {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        missing: id.to_string(),
                    })
            };
            let (from, to) = (lookup(&e.from)?, lookup(&e.to)?);
            if from == to {
                return Err(MapError::SelfLoop(e.from.clone()));
            }
            let key = if e.kind.is_symmetric() {
                (from.min(to), from.max(to), e.kind)
            } else {
                (from, to, e.kind)
            };
            if !seen.insert(key) {
                return Err(MapError::DuplicateEdge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    kind: e.kind,
                });
            }
            match e.kind {
                RoadEdgeKind::Consecutive => successors[from].push(to),
                RoadEdgeKind::Adjacent => {
                    adjacent[from].push(to);
                    adjacent[to].push(from);
                }
                RoadEdgeKind::Overlapping => {
                    overlapping[from].push(to);
                    overlapping[to].push(from);
                }
            }
        }
        for list in successors
            .iter_mut()
            .chain(adjacent.iter_mut())
            .chain(overlapping.iter_mut())
        {
            list.sort_unstable();
        }

        Ok(RoadGraph {
            segments,
            edges,
            index,
            successors,
            adjacent,
            overlapping,
        })
    }

    pub fn from_document(doc: MapDocument) -> Result<Self, MapError> {
        let segments = doc
            .segments
            .into_iter()
            .map(RoadSegment::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        RoadGraph::new(segments, doc.edges)
    }

    pub fn to_document(&self) -> MapDocument {
        MapDocument {
            segments: self.segments.iter().map(SegmentRecord::from).collect(),
            edges: self.edges.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("map documents always serialize")
    }

    pub fn segments(&self) -> &[RoadSegment] {
        &self.segments
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segment(&self, index: usize) -> &RoadSegment {
        &self.segments[index]
    }

    /// Position of `id` in lexicographic id order.
    pub fn segment_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn length(&self, index: usize) -> f64 {
        self.segments[index].length()
    }

    /// Forward successors of a segment.
    pub fn successors(&self, index: usize) -> &[usize] {
        &self.successors[index]
    }

    pub fn adjacent(&self, index: usize) -> &[usize] {
        &self.adjacent[index]
    }

    pub fn overlapping(&self, index: usize) -> &[usize] {
        &self.overlapping[index]
    }

    fn linked_by(&self, a: usize, b: usize, kind: RoadEdgeKind) -> bool {
        match kind {
            RoadEdgeKind::Consecutive => {
                self.successors[a].contains(&b) || self.successors[b].contains(&a)
            }
            RoadEdgeKind::Adjacent => self.adjacent[a].contains(&b),
            RoadEdgeKind::Overlapping => self.overlapping[a].contains(&b),
        }
    }

    /// Neighbors of `segment_id` along edges of `kind`, sorted by id.
    pub fn neighbors(&self, segment_id: &str, kind: RoadEdgeKind) -> Result<Vec<&str>, MapError> {
        let i = self
            .segment_index(segment_id)
            .ok_or_else(|| MapError::UnknownSegment(segment_id.to_string()))?;
        let list = match kind {
            RoadEdgeKind::Consecutive => &self.successors[i],
            RoadEdgeKind::Adjacent => &self.adjacent[i],
            RoadEdgeKind::Overlapping => &self.overlapping[i],
        };
        Ok(list.iter().map(|&j| self.segments[j].id.as_str()).collect())
    }

    /// Unordered segment pairs (lower index first) whose centerlines come within
    /// `tolerance`, skipping pairs already joined consecutively or side by side.
    pub fn geometric_overlaps(&self, tolerance: f64) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for a in 0..self.segments.len() {
            for b in a + 1..self.segments.len() {
                if self.linked_by(a, b, RoadEdgeKind::Consecutive)
                    || self.linked_by(a, b, RoadEdgeKind::Adjacent)
                {
                    continue;
                }
                let gap = self.segments[a]
                    .centerline
                    .distance_to(&self.segments[b].centerline);
                if gap <= tolerance {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    /// Returns a copy of the graph with `extra` edges appended.
    pub fn with_edges(&self, extra: impl IntoIterator<Item = RoadEdge>) -> Result<Self, MapError> {
        let mut edges = self.edges.clone();
        edges.extend(extra);
        RoadGraph::new(self.segments.clone(), edges)
    }
}

/// Parses and validates a map document.
pub fn parse_map(text: &str) -> Result<RoadGraph, MapError> {
    let doc: MapDocument = serde_json::from_str(text).map_err(|e| MapError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    RoadGraph::from_document(doc)
}

/// Overlapping edges implied by geometry but not yet declared.
///
/// Running it again on a graph extended with its own output yields nothing.
pub fn detect_overlaps(graph: &RoadGraph, tolerance: f64) -> Vec<RoadEdge> {
    graph
        .geometric_overlaps(tolerance)
        .into_iter()
        .filter(|&(a, b)| !graph.linked_by(a, b, RoadEdgeKind::Overlapping))
        .map(|(a, b)| {
            RoadEdge::new(
                graph.segments[a].id.clone(),
                graph.segments[b].id.clone(),
                RoadEdgeKind::Overlapping,
            )
        })
        .collect()
}

/// Disagreements between declared overlapping edges and geometry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OverlapAudit {
    /// Geometric overlaps with no declared edge.
    pub undeclared: Vec<(String, String)>,
    /// Declared overlapping edges whose centerlines stay apart.
    pub disjoint: Vec<(String, String)>,
}

impl OverlapAudit {
    pub fn is_clean(&self) -> bool {
        self.undeclared.is_empty() && self.disjoint.is_empty()
    }
}

pub fn audit_overlaps(graph: &RoadGraph, tolerance: f64) -> OverlapAudit {
    let geometric: BTreeSet<(usize, usize)> =
        graph.geometric_overlaps(tolerance).into_iter().collect();
    let id = |i: usize| graph.segments[i].id.clone();
    let mut audit = OverlapAudit::default();
    for &(a, b) in &geometric {
        if !graph.linked_by(a, b, RoadEdgeKind::Overlapping) {
            audit.undeclared.push((id(a), id(b)));
        }
    }
    for (a, partners) in graph.overlapping.iter().enumerate() {
        for &b in partners.iter().filter(|&&b| b > a) {
            let gap = graph.segments[a]
                .centerline
                .distance_to(&graph.segments[b].centerline);
            if gap > tolerance {
                audit.disjoint.push((id(a), id(b)));
            }
        }
    }
    audit
}
