//! Per-timestep semantic scene graphs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::{ObjectClass, Recording, SceneState};
use crate::map_model::RoadGraph;
use crate::matching::{match_scene, MatchConfig, ProjectionIdentity};
use crate::relations::{PathSearchConfig, Relation, RelationIndex};

/// A matched participant and all of its projection identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneNode {
    pub participant_id: u64,
    pub object_class: ObjectClass,
    pub speed: f64,
    pub identities: Vec<ProjectionIdentity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub timestamp: i64,
    /// Ascending participant id.
    pub nodes: Vec<SceneNode>,
    /// Ordered by source, target, class, |distance|, then segments.
    pub edges: Vec<Relation>,
}

impl SceneGraph {
    pub fn node(&self, participant_id: u64) -> Option<&SceneNode> {
        self.nodes
            .binary_search_by_key(&participant_id, |n| n.participant_id)
            .ok()
            .map(|i| &self.nodes[i])
    }
}

/// Counters collected while building one scene.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SceneDiagnostics {
    pub participants: usize,
    /// Participants without any projection identity.
    pub unmatched: usize,
    /// Intersections dropped because a declared overlap has no geometric meeting point.
    pub skipped_overlaps: usize,
}

impl std::ops::AddAssign for SceneDiagnostics {
    fn add_assign(&mut self, o: Self) {
        self.participants += o.participants;
        self.unmatched += o.unmatched;
        self.skipped_overlaps += o.skipped_overlaps;
    }
}

/// Builds scene graphs against one road graph, reusing route searches across scenes.
#[derive(Debug, Clone)]
pub struct SceneGraphBuilder<'g> {
    graph: &'g RoadGraph,
    index: RelationIndex,
    match_config: MatchConfig,
}

impl<'g> SceneGraphBuilder<'g> {
    pub fn new(
        graph: &'g RoadGraph,
        match_config: MatchConfig,
        path_config: PathSearchConfig,
    ) -> Self {
        SceneGraphBuilder {
            graph,
            index: RelationIndex::new(graph, &path_config),
            match_config,
        }
    }

    pub fn graph(&self) -> &'g RoadGraph {
        self.graph
    }

    pub fn build(&self, scene: &SceneState) -> (SceneGraph, SceneDiagnostics) {
        let matched = match_scene(scene, self.graph, &self.match_config);
        let diagnostics = SceneDiagnostics {
            participants: scene.participants.len(),
            unmatched: scene.participants.len() - matched.len(),
            skipped_overlaps: 0,
        };

        let mut nodes: Vec<SceneNode> = scene
            .participants
            .iter()
            .filter_map(|p| {
                matched.get(&p.participant_id).map(|ids| SceneNode {
                    participant_id: p.participant_id,
                    object_class: p.object_class,
                    speed: p.speed(),
                    identities: ids.clone(),
                })
            })
            .collect();
        nodes.sort_by_key(|n| n.participant_id);

        let mut skipped = 0;
        let mut edges = Vec::new();
        for source in &nodes {
            for target in nodes
                .iter()
                .filter(|n| n.participant_id != source.participant_id)
            {
                for m_i in &source.identities {
                    for m_j in &target.identities {
                        let out = self.index.relate(m_i, m_j, self.graph);
                        skipped += out.skipped_overlaps;
                        edges.extend(out.relations);
                    }
                }
            }
        }
        edges.sort_by(|a, b| {
            (a.source, a.target, a.relation_class)
                .cmp(&(b.source, b.target, b.relation_class))
                .then(a.distance().abs().total_cmp(&b.distance().abs()))
                .then_with(|| a.segment_a.cmp(&b.segment_a))
                .then_with(|| a.segment_b.cmp(&b.segment_b))
        });

        (
            SceneGraph {
                timestamp: scene.timestamp,
                nodes,
                edges,
            },
            SceneDiagnostics {
                skipped_overlaps: skipped,
                ..diagnostics
            },
        )
    }

    /// One graph per scene, in timestamp order. Scenes are built in parallel
    /// on the current rayon pool.
    pub fn build_recording(&self, recording: &Recording) -> (Vec<SceneGraph>, SceneDiagnostics) {
        let built: Vec<(SceneGraph, SceneDiagnostics)> = recording
            .scenes()
            .par_iter()
            .map(|scene| self.build(scene))
            .collect();
        let mut total = SceneDiagnostics::default();
        let graphs = built
            .into_iter()
            .map(|(g, d)| {
                total += d;
                g
            })
            .collect();
        (graphs, total)
    }
}

pub fn build_scene_graph(
    scene: &SceneState,
    graph: &RoadGraph,
    match_config: &MatchConfig,
    path_config: &PathSearchConfig,
) -> SceneGraph {
    SceneGraphBuilder::new(graph, *match_config, *path_config)
        .build(scene)
        .0
}

pub fn build_recording(
    recording: &Recording,
    graph: &RoadGraph,
    match_config: &MatchConfig,
    path_config: &PathSearchConfig,
) -> Vec<SceneGraph> {
    SceneGraphBuilder::new(graph, *match_config, *path_config)
        .build_recording(recording)
        .0
}
