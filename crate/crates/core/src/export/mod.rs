//! Serialization of scene graphs: Graphviz DOT text and a TUDataset-style
//! numeric layout.

mod dataset;
mod dot;

use std::path::PathBuf;

pub use dataset::{
    edge_vector, export_dataset, node_vector, DatasetFiles, NumericExport, EDGE_ATTRIBUTES,
    NODE_ATTRIBUTES,
};
pub use dot::to_dot;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("relation references unknown segment {0:?}")]
    UnknownSegment(String),
    #[error("nothing to export: the graph list is empty")]
    EmptyDataset,
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Fixed six-digit decimal, locale independent, without negative zero.
pub fn format_decimal(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}
