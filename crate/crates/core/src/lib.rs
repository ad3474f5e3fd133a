//! Semantic scene graphs for traffic scenes.
//!
//! Object lists of traffic participants are matched onto a lane-level road
//! graph; pairs of matched participants are related longitudinally,
//! laterally or through an intersection, and every timestep becomes a
//! directed multigraph that can be written as DOT or as TUDataset-style
//! matrices.

pub mod cli;
pub mod export;
pub mod frenet;
pub mod geometry;
pub mod ingest;
pub mod map_model;
pub mod matching;
pub mod relations;
pub mod scene_graph;

pub use frenet::{matching_probability, project_point, FrenetProjection, MatchParams, Polyline};
pub use geometry::Vec2;
pub use ingest::{parse_object_list, ObjectClass, Recording, SceneState, TrafficParticipantState};
pub use map_model::{parse_map, RoadEdge, RoadEdgeKind, RoadGraph, RoadSegment};
pub use matching::{MatchConfig, ProjectionIdentity};
pub use relations::{PathSearchConfig, Relation, RelationClass};
pub use scene_graph::{
    build_recording, build_scene_graph, SceneGraph, SceneGraphBuilder, SceneNode,
};
