use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{format_decimal, ExportError};
use crate::ingest::ObjectClass;
use crate::map_model::RoadGraph;
use crate::relations::{Relation, RelationClass};
use crate::scene_graph::{SceneGraph, SceneNode};

pub const NODE_ATTRIBUTES: usize = 6;
pub const EDGE_ATTRIBUTES: usize = 11;

/// `[car, pedestrian, bike, truck, other, speed]`.
pub fn node_vector(node: &SceneNode) -> [f64; NODE_ATTRIBUTES] {
    let mut v = [0.0; NODE_ATTRIBUTES];
    v[node.object_class.one_hot_index()] = 1.0;
    v[ObjectClass::ALL.len()] = node.speed;
    v
}

/// `[lon, lat, int, d_F, d_ip, a, d_t_i, phi_i, b, d_t_j, phi_j]` with `a`
/// and `b` as road-graph segment indices. The unused distance is 0.
pub fn edge_vector(
    relation: &Relation,
    graph: &RoadGraph,
) -> Result<[f64; EDGE_ATTRIBUTES], ExportError> {
    let index = |id: &str| {
        graph
            .segment_index(id)
            .ok_or_else(|| ExportError::UnknownSegment(id.to_string()))
    };
    let a = index(&relation.segment_a)?;
    let b = index(&relation.segment_b)?;
    let mut v = [0.0; EDGE_ATTRIBUTES];
    v[relation.relation_class.one_hot_index()] = 1.0;
    let n = RelationClass::ALL.len();
    v[n] = relation.d_f.unwrap_or(0.0);
    v[n + 1] = relation.d_ip.unwrap_or(0.0);
    v[n + 2] = a as f64;
    v[n + 3] = relation.d_t_i;
    v[n + 4] = relation.phi_i;
    v[n + 5] = b as f64;
    v[n + 6] = relation.d_t_j;
    v[n + 7] = relation.phi_j;
    Ok(v)
}

/// Batched numeric form of a list of scene graphs.
///
/// Node indices in `a_coo` are 1-based and run across all graphs;
/// `graph_indicator[k]` is the 1-based graph number of node `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericExport {
    pub a_coo: Vec<(usize, usize)>,
    pub node_attributes: Vec<[f64; NODE_ATTRIBUTES]>,
    pub edge_attributes: Vec<[f64; EDGE_ATTRIBUTES]>,
    pub graph_indicator: Vec<usize>,
}

/// Paths of the four files written by [`export_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetFiles {
    pub adjacency: PathBuf,
    pub graph_indicator: PathBuf,
    pub node_attributes: PathBuf,
    pub edge_attributes: PathBuf,
}

impl DatasetFiles {
    pub fn for_prefix(prefix: &Path) -> Self {
        let with = |suffix: &str| {
            let mut name = prefix.as_os_str().to_owned();
            name.push(suffix);
            PathBuf::from(name)
        };
        DatasetFiles {
            adjacency: with("_A.txt"),
            graph_indicator: with("_graph_indicator.txt"),
            node_attributes: with("_node_attributes.txt"),
            edge_attributes: with("_edge_attributes.txt"),
        }
    }
}

impl NumericExport {
    pub fn from_graphs(graphs: &[SceneGraph], road: &RoadGraph) -> Result<Self, ExportError> {
        let mut out = NumericExport {
            a_coo: Vec::new(),
            node_attributes: Vec::new(),
            edge_attributes: Vec::new(),
            graph_indicator: Vec::new(),
        };
        for (g, graph) in graphs.iter().enumerate() {
            let base = out.node_attributes.len();
            for node in &graph.nodes {
                out.node_attributes.push(node_vector(node));
                out.graph_indicator.push(g + 1);
            }
            for edge in &graph.edges {
                let local = |pid: u64| {
                    graph
                        .nodes
                        .binary_search_by_key(&pid, |n| n.participant_id)
                        .expect("edge endpoints are graph nodes")
                };
                out.a_coo
                    .push((base + local(edge.source) + 1, base + local(edge.target) + 1));
                out.edge_attributes.push(edge_vector(edge, road)?);
            }
        }
        Ok(out)
    }

    pub fn write(&self, prefix: &Path) -> Result<DatasetFiles, ExportError> {
        let files = DatasetFiles::for_prefix(prefix);
        write_lines(
            &files.adjacency,
            self.a_coo.iter().map(|(i, j)| format!("{i}, {j}")),
        )?;
        write_lines(
            &files.graph_indicator,
            self.graph_indicator.iter().map(|g| g.to_string()),
        )?;
        write_lines(
            &files.node_attributes,
            self.node_attributes.iter().map(|r| row(r)),
        )?;
        write_lines(
            &files.edge_attributes,
            self.edge_attributes.iter().map(|r| row(r)),
        )?;
        Ok(files)
    }
}

fn row(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| format_decimal(v))
        .collect::<Vec<_>>()
        .join(", ")
}

fn write_lines(path: &Path, lines: impl Iterator<Item = String>) -> Result<(), ExportError> {
    let io = |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for line in lines {
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes `<prefix>_A.txt`, `<prefix>_graph_indicator.txt`,
/// `<prefix>_node_attributes.txt` and `<prefix>_edge_attributes.txt`.
pub fn export_dataset(
    graphs: &[SceneGraph],
    road: &RoadGraph,
    prefix: &Path,
) -> Result<DatasetFiles, ExportError> {
    if graphs.is_empty() {
        return Err(ExportError::EmptyDataset);
    }
    NumericExport::from_graphs(graphs, road)?.write(prefix)
}
