//! Bounded route enumeration over the road graph.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::map_model::{RoadEdgeKind, RoadGraph, DEFAULT_OVERLAP_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSearchConfig {
    /// Upper bound on the summed length of the segments a path enters.
    pub max_total_length: f64,
    /// Largest centerline gap still accepted as an intersection point.
    pub overlap_tolerance: f64,
}

impl Default for PathSearchConfig {
    fn default() -> Self {
        PathSearchConfig {
            max_total_length: 150.0,
            overlap_tolerance: DEFAULT_OVERLAP_TOLERANCE,
        }
    }
}

/// A simple route through the road graph starting at `segments[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadPath {
    /// Segment indices in travel order.
    pub segments: Vec<usize>,
    /// `kinds[k]` joins `segments[k]` to `segments[k + 1]`.
    pub kinds: Vec<RoadEdgeKind>,
    /// Along-lane position of each segment's start relative to the start
    /// segment's start. Side steps onto an adjacent lane keep the position.
    pub offsets: Vec<f64>,
    /// Summed length of every segment after the first.
    pub total_length: f64,
}

impl RoadPath {
    fn trivial(start: usize) -> Self {
        RoadPath {
            segments: vec![start],
            kinds: Vec::new(),
            offsets: vec![0.0],
            total_length: 0.0,
        }
    }

    pub fn start(&self) -> usize {
        self.segments[0]
    }

    pub fn position(&self, segment: usize) -> Option<usize> {
        self.segments.iter().position(|&s| s == segment)
    }

    pub fn adjacent_count(&self) -> usize {
        self.kinds
            .iter()
            .filter(|&&k| k == RoadEdgeKind::Adjacent)
            .count()
    }

    pub fn ids<'g>(&self, graph: &'g RoadGraph) -> Vec<&'g str> {
        self.segments
            .iter()
            .map(|&s| graph.segment(s).id.as_str())
            .collect()
    }

    fn extend(&self, graph: &RoadGraph, next: usize, kind: RoadEdgeKind) -> RoadPath {
        let last = *self.segments.last().expect("paths are non-empty");
        let step = match kind {
            RoadEdgeKind::Consecutive => graph.length(last),
            _ => 0.0,
        };
        let mut p = self.clone();
        p.offsets
            .push(self.offsets.last().copied().unwrap_or(0.0) + step);
        p.segments.push(next);
        p.kinds.push(kind);
        p.total_length += graph.length(next);
        p
    }
}

struct Frontier {
    cost: f64,
    seq: usize,
    path: RoadPath,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // min-heap on cost, then insertion order
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Every simple path from `start` along consecutive (forward) and adjacent
/// (either way) edges with at most one adjacent step and a summed length
/// within the bound. Partial paths are expanded cheapest first and a branch
/// stops once its length exceeds the bound.
///
/// The result is sorted lexicographically by segment sequence and always
/// contains the single-segment path.
pub fn find_paths(graph: &RoadGraph, start: usize, config: &PathSearchConfig) -> Vec<RoadPath> {
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Frontier {
        cost: 0.0,
        seq,
        path: RoadPath::trivial(start),
    });

    let mut done = Vec::new();
    while let Some(Frontier { path, .. }) = heap.pop() {
        let last = *path.segments.last().expect("paths are non-empty");
        let lateral_left = path.adjacent_count() == 0;
        let steps = graph
            .successors(last)
            .iter()
            .map(|&n| (n, RoadEdgeKind::Consecutive))
            .chain(
                graph
                    .adjacent(last)
                    .iter()
                    .filter(|_| lateral_left)
                    .map(|&n| (n, RoadEdgeKind::Adjacent)),
            );
        for (next, kind) in steps {
            if path.segments.contains(&next) {
                continue;
            }
            let cost = path.total_length + graph.length(next);
            if cost > config.max_total_length {
                continue;
            }
            seq += 1;
            heap.push(Frontier {
                cost,
                seq,
                path: path.extend(graph, next, kind),
            });
        }
        done.push(path);
    }
    done.sort_by(|a, b| a.segments.cmp(&b.segments));
    done
}

/// One way a path set reaches a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reach {
    pub path: usize,
    /// Position of the segment within the path.
    pub position: usize,
    pub offset: f64,
    pub lateral: bool,
}

/// All bounded paths from one start segment, indexed by the segments they reach.
#[derive(Debug, Clone)]
pub struct PathSet {
    paths: Vec<RoadPath>,
    reach: BTreeMap<usize, Vec<Reach>>,
}

impl PathSet {
    pub fn new(paths: Vec<RoadPath>) -> Self {
        let mut reach: BTreeMap<usize, Vec<Reach>> = BTreeMap::new();
        for (pi, p) in paths.iter().enumerate() {
            let mut lateral = false;
            for (pos, &seg) in p.segments.iter().enumerate() {
                if pos > 0 && p.kinds[pos - 1] == RoadEdgeKind::Adjacent {
                    lateral = true;
                }
                let entry = Reach {
                    path: pi,
                    position: pos,
                    offset: p.offsets[pos],
                    lateral,
                };
                let list = reach.entry(seg).or_default();
                // prefixes of longer paths repeat the same route
                if !list
                    .iter()
                    .any(|r| r.lateral == lateral && r.offset == entry.offset)
                {
                    list.push(entry);
                }
            }
        }
        PathSet { paths, reach }
    }

    pub fn search(graph: &RoadGraph, start: usize, config: &PathSearchConfig) -> Self {
        PathSet::new(find_paths(graph, start, config))
    }

    pub fn paths(&self) -> &[RoadPath] {
        &self.paths
    }

    pub fn reaching(&self, segment: usize) -> &[Reach] {
        self.reach.get(&segment).map_or(&[], Vec::as_slice)
    }

    pub fn reaches(&self, segment: usize) -> bool {
        self.reach.contains_key(&segment)
    }

    pub fn reached(&self) -> impl Iterator<Item = (usize, &[Reach])> {
        self.reach.iter().map(|(&s, r)| (s, r.as_slice()))
    }

    /// Edge kinds of the route up to the reached segment.
    pub fn kinds_to(&self, reach: &Reach) -> &[RoadEdgeKind] {
        &self.paths[reach.path].kinds[..reach.position]
    }
}
