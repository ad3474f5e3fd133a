//! Semantic relations between projection identities.
//!
//! A relation from identity `i` (on segment `a`) to identity `j` (on
//! segment `b`) exists when one of `i`'s bounded routes leads to `b`
//! (longitudinal, or lateral with one side step), or when a route of `i`
//! and a route of `j` contain two segments that overlap (intersecting).

mod paths;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use paths::{find_paths, PathSearchConfig, PathSet, Reach, RoadPath};

use crate::map_model::{RoadEdgeKind, RoadGraph};
use crate::matching::ProjectionIdentity;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RelationError {
    #[error(
        "segments {a:?} and {b:?} are declared overlapping but their centerlines stay {gap:.3} m apart"
    )]
    NoGeometricOverlap { a: String, b: String, gap: f64 },
    #[error("segment {0:?} is not on the path")]
    NotOnPath(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationClass {
    Longitudinal,
    Lateral,
    Intersecting,
}

impl RelationClass {
    pub const ALL: [RelationClass; 3] = [
        RelationClass::Longitudinal,
        RelationClass::Lateral,
        RelationClass::Intersecting,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationClass::Longitudinal => "longitudinal",
            RelationClass::Lateral => "lateral",
            RelationClass::Intersecting => "intersecting",
        }
    }

    pub fn one_hot_index(self) -> usize {
        self as usize
    }
}

/// Classifies the edge kinds along a route between two identities.
///
/// Without an overlapping edge: no side step is longitudinal, exactly one is
/// lateral. With exactly one overlapping edge the route is intersecting,
/// provided each side of it takes at most one side step.
pub fn classify_path(kinds: &[RoadEdgeKind]) -> Option<RelationClass> {
    let overlaps: Vec<usize> = kinds
        .iter()
        .enumerate()
        .filter(|(_, &k)| k == RoadEdgeKind::Overlapping)
        .map(|(i, _)| i)
        .collect();
    let adjacent =
        |ks: &[RoadEdgeKind]| ks.iter().filter(|&&k| k == RoadEdgeKind::Adjacent).count();
    match overlaps.as_slice() {
        [] => match adjacent(kinds) {
            0 => Some(RelationClass::Longitudinal),
            1 => Some(RelationClass::Lateral),
            _ => None,
        },
        [at] => {
            let (before, after) = (&kinds[..*at], &kinds[at + 1..]);
            (adjacent(before) <= 1 && adjacent(after) <= 1).then_some(RelationClass::Intersecting)
        }
        _ => None,
    }
}

/// One directed, attributed scene-graph edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub source: u64,
    pub target: u64,
    pub relation_class: RelationClass,
    /// Along-lane distance from source to target; longitudinal and lateral only.
    pub d_f: Option<f64>,
    /// Distance from the source to the intersection point; intersecting only.
    pub d_ip: Option<f64>,
    pub segment_a: String,
    pub segment_b: String,
    pub d_t_i: f64,
    pub phi_i: f64,
    pub d_t_j: f64,
    pub phi_j: f64,
    /// Edge kinds of the route that produced this relation.
    pub witness: Vec<RoadEdgeKind>,
}

impl Relation {
    /// `d_f` or `d_ip`, whichever the class carries.
    pub fn distance(&self) -> f64 {
        self.d_f
            .or(self.d_ip)
            .expect("relations always carry a distance")
    }
}

/// Along-lane distance from `s_i` on the path start to `s_j` on `target`.
pub fn compute_d_f(path: &RoadPath, target: usize, s_i: f64, s_j: f64) -> Option<f64> {
    path.position(target).map(|k| path.offsets[k] + s_j - s_i)
}

/// Arc length on `segment` where its centerline meets `partner`'s.
pub fn overlap_arc_length(
    graph: &RoadGraph,
    segment: usize,
    partner: usize,
    tolerance: f64,
) -> Result<f64, RelationError> {
    let (s, gap) = graph
        .segment(segment)
        .centerline
        .meeting_point(&graph.segment(partner).centerline);
    if gap <= tolerance {
        Ok(s)
    } else {
        Err(RelationError::NoGeometricOverlap {
            a: graph.segment(segment).id.clone(),
            b: graph.segment(partner).id.clone(),
            gap,
        })
    }
}

/// Distance along `path` from `s_i` to where `overlap_segment` meets `partner`.
pub fn compute_d_ip(
    path: &RoadPath,
    overlap_segment: usize,
    partner: usize,
    s_i: f64,
    graph: &RoadGraph,
    tolerance: f64,
) -> Result<f64, RelationError> {
    let k = path
        .position(overlap_segment)
        .ok_or_else(|| RelationError::NotOnPath(graph.segment(overlap_segment).id.clone()))?;
    let s_x = overlap_arc_length(graph, overlap_segment, partner, tolerance)?;
    Ok(path.offsets[k] + s_x - s_i)
}

/// Intersection points of every declared overlapping pair, computed once per map.
#[derive(Debug, Clone)]
pub struct OverlapTable {
    points: HashMap<(usize, usize), Result<f64, RelationError>>,
}

impl OverlapTable {
    pub fn new(graph: &RoadGraph, tolerance: f64) -> Self {
        let mut points = HashMap::new();
        for a in 0..graph.len() {
            for &b in graph.overlapping(a) {
                points.insert((a, b), overlap_arc_length(graph, a, b, tolerance));
            }
        }
        OverlapTable { points }
    }

    /// Arc length on `segment` of its meeting point with `partner`.
    pub fn arc_length(
        &self,
        segment: usize,
        partner: usize,
    ) -> Option<&Result<f64, RelationError>> {
        self.points.get(&(segment, partner))
    }

    /// Declared overlaps without a geometric meeting point.
    pub fn inconsistent(&self) -> impl Iterator<Item = &RelationError> {
        self.points.values().filter_map(|r| r.as_ref().err())
    }
}

/// Outcome of relating one ordered identity pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairRelations {
    pub relations: Vec<Relation>,
    /// Intersections skipped because the map declares an overlap geometry lacks.
    pub skipped_overlaps: usize,
}

#[derive(Clone, Copy)]
struct Best<'a> {
    distance: f64,
    prefix: &'a [RoadEdgeKind],
    suffix: Option<&'a [RoadEdgeKind]>,
}

fn closer(distance: f64, current: &Option<Best<'_>>) -> bool {
    current.is_none_or(|b| (distance.abs(), distance) < (b.distance.abs(), b.distance))
}

/// Relations from identity `i` to identity `j`, at most one per class.
///
/// Several routes to the same target collapse onto the one with the smallest
/// absolute distance.
pub fn relate_pair(
    identity_i: &ProjectionIdentity,
    identity_j: &ProjectionIdentity,
    paths_i: &PathSet,
    paths_j: &PathSet,
    overlaps: &OverlapTable,
    graph: &RoadGraph,
) -> PairRelations {
    let mut out = PairRelations::default();
    if identity_i.participant_id == identity_j.participant_id {
        return out;
    }
    let b = identity_j.segment_index;
    let s_i = identity_i.projection.s;
    let s_j = identity_j.projection.s;

    let mut along: [Option<Best<'_>>; 2] = [None, None];
    for reach in paths_i.reaching(b) {
        let d = reach.offset + s_j - s_i;
        let slot = &mut along[usize::from(reach.lateral)];
        if closer(d, slot) {
            *slot = Some(Best {
                distance: d,
                prefix: paths_i.kinds_to(reach),
                suffix: None,
            });
        }
    }

    let mut crossing: Option<Best<'_>> = None;
    for (u, reaches_u) in paths_i.reached() {
        for &v in graph.overlapping(u) {
            let Some(reach_v) = paths_j.reaching(v).first() else {
                continue;
            };
            let s_x = match overlaps.arc_length(u, v) {
                Some(Ok(s)) => *s,
                Some(Err(_)) | None => {
                    out.skipped_overlaps += 1;
                    continue;
                }
            };
            for reach in reaches_u {
                let d = reach.offset + s_x - s_i;
                if closer(d, &crossing) {
                    crossing = Some(Best {
                        distance: d,
                        prefix: paths_i.kinds_to(reach),
                        suffix: Some(paths_j.kinds_to(reach_v)),
                    });
                }
            }
        }
    }

    let classes = [
        (RelationClass::Longitudinal, along[0]),
        (RelationClass::Lateral, along[1]),
        (RelationClass::Intersecting, crossing),
    ];
    for (class, best) in classes {
        let Some(best) = best else { continue };
        let mut witness = best.prefix.to_vec();
        if let Some(suffix) = best.suffix {
            witness.push(RoadEdgeKind::Overlapping);
            witness.extend(suffix.iter().rev());
        }
        let intersecting = class == RelationClass::Intersecting;
        out.relations.push(Relation {
            source: identity_i.participant_id,
            target: identity_j.participant_id,
            relation_class: class,
            d_f: (!intersecting).then_some(best.distance),
            d_ip: intersecting.then_some(best.distance),
            segment_a: identity_i.segment_id.clone(),
            segment_b: identity_j.segment_id.clone(),
            d_t_i: identity_i.projection.d_t,
            phi_i: identity_i.projection.phi,
            d_t_j: identity_j.projection.d_t,
            phi_j: identity_j.projection.phi,
            witness,
        });
    }
    out
}

/// Route sets for every segment plus overlap geometry, shared across scenes.
#[derive(Debug, Clone)]
pub struct RelationIndex {
    path_sets: Vec<PathSet>,
    overlaps: OverlapTable,
}

impl RelationIndex {
    pub fn new(graph: &RoadGraph, config: &PathSearchConfig) -> Self {
        RelationIndex {
            path_sets: (0..graph.len())
                .map(|s| PathSet::search(graph, s, config))
                .collect(),
            overlaps: OverlapTable::new(graph, config.overlap_tolerance),
        }
    }

    pub fn paths_from(&self, segment: usize) -> &PathSet {
        &self.path_sets[segment]
    }

    pub fn overlaps(&self) -> &OverlapTable {
        &self.overlaps
    }

    pub fn relate(
        &self,
        identity_i: &ProjectionIdentity,
        identity_j: &ProjectionIdentity,
        graph: &RoadGraph,
    ) -> PairRelations {
        relate_pair(
            identity_i,
            identity_j,
            self.paths_from(identity_i.segment_index),
            self.paths_from(identity_j.segment_index),
            &self.overlaps,
            graph,
        )
    }
}
