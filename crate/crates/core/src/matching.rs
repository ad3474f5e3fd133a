//! Assigns participants to lane segments as projection identities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::frenet::{lateral_factor, matching_probability, FrenetProjection, MatchParams};
use crate::ingest::{ObjectClass, SceneState, TrafficParticipantState};
use crate::map_model::RoadGraph;

/// One participant matched onto one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionIdentity {
    pub participant_id: u64,
    pub segment_id: String,
    /// Index of `segment_id` in the road graph.
    pub segment_index: usize,
    pub projection: FrenetProjection,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid match configuration: {0}")]
pub struct InvalidMatchConfig(String);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub match_params: MatchParams,
    /// Vehicles farther than this from a centerline are not matched to it.
    pub max_lateral_distance: f64,
    pub min_probability: f64,
    pub pedestrian_radius: f64,
    pub pedestrian_max_segments: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            match_params: MatchParams::default(),
            max_lateral_distance: 5.0,
            min_probability: 0.05,
            pedestrian_radius: 3.0,
            pedestrian_max_segments: 3,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), InvalidMatchConfig> {
        self.match_params
            .validate()
            .map_err(|e| InvalidMatchConfig(e.to_string()))?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(InvalidMatchConfig(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("max_lateral_distance", self.max_lateral_distance)?;
        positive("pedestrian_radius", self.pedestrian_radius)?;
        if !(self.min_probability > 0.0 && self.min_probability < 1.0) {
            return Err(InvalidMatchConfig(format!(
                "min_probability must lie in (0, 1), got {}",
                self.min_probability
            )));
        }
        if self.pedestrian_max_segments == 0 {
            return Err(InvalidMatchConfig(
                "pedestrian_max_segments must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn identity(
    state: &TrafficParticipantState,
    graph: &RoadGraph,
    segment_index: usize,
    projection: FrenetProjection,
    probability: f64,
) -> ProjectionIdentity {
    ProjectionIdentity {
        participant_id: state.participant_id,
        segment_id: graph.segment(segment_index).id.clone(),
        segment_index,
        projection,
        probability,
    }
}

/// Candidate identities for one participant, most probable first.
///
/// Vehicles are scored with both Gaussians. Pedestrians go to their nearest
/// segments within `pedestrian_radius`, ignoring orientation.
pub fn match_participant(
    state: &TrafficParticipantState,
    graph: &RoadGraph,
    config: &MatchConfig,
) -> Vec<ProjectionIdentity> {
    let projections = graph
        .segments()
        .iter()
        .enumerate()
        .map(|(i, seg)| (i, seg.centerline.project(state.x, state.y, state.psi)));

    let mut out: Vec<ProjectionIdentity> = if state.object_class == ObjectClass::Pedestrian {
        let mut near: Vec<(usize, FrenetProjection)> = projections
            .filter(|(_, p)| p.d_t.abs() <= config.pedestrian_radius)
            .collect();
        near.sort_by(|a, b| a.1.d_t.abs().total_cmp(&b.1.d_t.abs()).then(a.0.cmp(&b.0)));
        near.truncate(config.pedestrian_max_segments);
        near.into_iter()
            .map(|(i, p)| {
                let prob = lateral_factor(p.d_t, config.match_params.sigma_d);
                identity(state, graph, i, p, prob)
            })
            .filter(|m| m.probability > 0.0)
            .collect()
    } else {
        projections
            .filter(|(_, p)| p.d_t.abs() <= config.max_lateral_distance)
            .map(|(i, p)| {
                let prob = matching_probability(p.d_t, p.phi, &config.match_params);
                identity(state, graph, i, p, prob)
            })
            .filter(|m| m.probability >= config.min_probability)
            .collect()
    };
    out.sort_by(|a, b| {
        b.probability
            .total_cmp(&a.probability)
            .then(a.segment_index.cmp(&b.segment_index))
    });
    out
}

/// Identities for every participant that matched at least one segment.
///
/// Participants without identities are left out of the map.
pub fn match_scene(
    scene: &SceneState,
    graph: &RoadGraph,
    config: &MatchConfig,
) -> BTreeMap<u64, Vec<ProjectionIdentity>> {
    scene
        .participants
        .iter()
        .filter_map(|p| {
            let ids = match_participant(p, graph, config);
            (!ids.is_empty()).then_some((p.participant_id, ids))
        })
        .collect()
}
