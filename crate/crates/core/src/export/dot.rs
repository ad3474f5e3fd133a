use std::fmt::Write;

use super::format_decimal;
use crate::scene_graph::SceneGraph;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders one scene graph as a Graphviz digraph named `scene_t<timestamp>`.
///
/// Nodes are `p<participant_id>`. Every edge carries its relation class and
/// the full attribute set; the distance a class does not use is omitted.
pub fn to_dot(graph: &SceneGraph) -> String {
    let name = if graph.timestamp < 0 {
        format!("scene_tm{}", graph.timestamp.unsigned_abs())
    } else {
        format!("scene_t{}", graph.timestamp)
    };
    if graph.nodes.is_empty() {
        return format!("digraph {name} {{ }}\n");
    }

    let mut out = format!("digraph {name} {{\n");
    for n in &graph.nodes {
        let _ = writeln!(
            out,
            "  p{id} [label={label}, participant_id={id}, class={class}, speed={speed}];",
            id = n.participant_id,
            label = quote(&format!("{} {}", n.participant_id, n.object_class.as_str())),
            class = quote(n.object_class.as_str()),
            speed = format_decimal(n.speed),
        );
    }
    for e in &graph.edges {
        let distance = match (e.d_f, e.d_ip) {
            (Some(d), _) => format!("d_F={}", format_decimal(d)),
            (None, Some(d)) => format!("d_ip={}", format_decimal(d)),
            (None, None) => unreachable!("relations always carry a distance"),
        };
        let _ = writeln!(
            out,
            "  p{} -> p{} [relation={}, {}, a={}, d_t_i={}, phi_i={}, b={}, d_t_j={}, phi_j={}];",
            e.source,
            e.target,
            quote(e.relation_class.as_str()),
            distance,
            quote(&e.segment_a),
            format_decimal(e.d_t_i),
            format_decimal(e.phi_i),
            quote(&e.segment_b),
            format_decimal(e.d_t_j),
            format_decimal(e.phi_j),
        );
    }
    out.push_str("}\n");
    out
}
