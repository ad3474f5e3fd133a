//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use ssg::frenet::FrenetProjection;
use ssg::geometry::Vec2;
use ssg::map_model::{RoadEdge, RoadEdgeKind, RoadGraph, RoadSegment};
use ssg::matching::ProjectionIdentity;
use ssg::relations::{overlap_arc_length, RelationClass};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture_map() -> RoadGraph {
    ssg::parse_map(&std::fs::read_to_string(fixture("sample_map.json")).unwrap()).unwrap()
}

// ---------------------------------------------------------------------------
// Frenet: dense sampling

fn seg_len(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.0 - a.0).hypot(b.1 - a.1)
}

fn point_along(points: &[(f64, f64)], s: f64) -> (f64, f64) {
    let mut acc = 0.0;
    for w in points.windows(2) {
        let l = seg_len(w[0], w[1]);
        if s <= acc + l {
            let t = ((s - acc) / l).clamp(0.0, 1.0);
            return (
                w[0].0 + t * (w[1].0 - w[0].0),
                w[0].1 + t * (w[1].1 - w[0].1),
            );
        }
        acc += l;
    }
    *points.last().unwrap()
}

/// Nearest point on a polyline by 1 mm sampling, each candidate minimum
/// refined by ternary search. Returns `(s, distance)`; near-equal minima
/// resolve to the smaller `s`.
pub fn dense_projection(points: &[(f64, f64)], x: f64, y: f64) -> (f64, f64) {
    const STEP: f64 = 1e-3;
    let total: f64 = points.windows(2).map(|w| seg_len(w[0], w[1])).sum();
    let dist = |s: f64| {
        let p = point_along(points, s);
        (p.0 - x).hypot(p.1 - y)
    };
    let n = (total / STEP).ceil() as usize;
    let samples: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let s = (i as f64 * STEP).min(total);
            (s, dist(s))
        })
        .collect();
    let floor = samples.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);

    let mut refined = Vec::new();
    for i in 0..samples.len() {
        let d = samples[i].1;
        let left = i == 0 || d <= samples[i - 1].1;
        let right = i + 1 == samples.len() || d <= samples[i + 1].1;
        if !(left && right) || d > floor + 2.0 * STEP {
            continue;
        }
        let (mut lo, mut hi) = (
            (samples[i].0 - STEP).max(0.0),
            (samples[i].0 + STEP).min(total),
        );
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if dist(m1) <= dist(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let s = 0.5 * (lo + hi);
        refined.push((s, dist(s)));
    }
    let best = refined.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    refined
        .into_iter()
        .filter(|p| p.1 <= best + 1e-9)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
}

/// Random polyline with 2 to 6 vertices and a total length below about 50 m.
pub fn random_polyline(rng: &mut impl Rng) -> Vec<(f64, f64)> {
    let n = rng.gen_range(2..=6);
    let mut heading = rng.gen_range(-3.1..3.1);
    let mut p = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
    let mut pts = vec![p];
    for _ in 1..n {
        let l = rng.gen_range(0.5..10.0);
        p = (p.0 + l * f64::cos(heading), p.1 + l * f64::sin(heading));
        pts.push(p);
        heading += rng.gen_range(-2.5..2.5);
    }
    pts
}

// ---------------------------------------------------------------------------
// Random road graphs

fn id(k: usize) -> String {
    format!("S{k:02}")
}

/// Road graph with 2 to 12 segments and random consecutive, adjacent and
/// overlapping edges. Every declared overlap is geometrically real: the
/// newer segment passes through a point of the older one.
pub fn random_map(rng: &mut impl Rng) -> RoadGraph {
    let n = rng.gen_range(2..=12);
    let mut segments: Vec<RoadSegment> = Vec::new();
    let mut edges: Vec<RoadEdge> = Vec::new();
    for k in 0..n {
        let crosses = k > 0 && rng.gen_bool(0.4);
        let pts = if crosses {
            let u = rng.gen_range(0..k);
            let line = &segments[u].centerline;
            let q = line.point_at(rng.gen_range(0.1..0.9) * line.length());
            let h: f64 = rng.gen_range(-3.1..3.1);
            let (l1, l2) = (rng.gen_range(2.0..30.0), rng.gen_range(2.0..30.0));
            let turn = h + rng.gen_range(-0.5..0.5);
            edges.push(RoadEdge::new(id(u), id(k), RoadEdgeKind::Overlapping));
            vec![
                Vec2::new(q.x - l1 * h.cos(), q.y - l1 * h.sin()),
                q,
                Vec2::new(q.x + l2 * turn.cos(), q.y + l2 * turn.sin()),
            ]
        } else {
            let mut p = Vec2::new(rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0));
            let mut h: f64 = rng.gen_range(-3.1..3.1);
            let mut pts = vec![p];
            for _ in 0..rng.gen_range(1..=3) {
                let l = rng.gen_range(3.0..40.0);
                p = Vec2::new(p.x + l * h.cos(), p.y + l * h.sin());
                pts.push(p);
                h += rng.gen_range(-0.6..0.6);
            }
            pts
        };
        segments.push(RoadSegment::new(id(k), pts).unwrap());
    }
    let p_next = (2.0 / n as f64).min(0.9);
    let p_side = (1.0 / n as f64).min(0.5);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            if rng.gen_bool(p_next) {
                edges.push(RoadEdge::new(id(a), id(b), RoadEdgeKind::Consecutive));
            }
            if a < b && rng.gen_bool(p_side) {
                edges.push(RoadEdge::new(id(a), id(b), RoadEdgeKind::Adjacent));
            }
        }
    }
    RoadGraph::new(segments, edges).unwrap()
}

/// Identity for participant `pid` at arc length `s` of segment `seg`.
pub fn identity(
    graph: &RoadGraph,
    pid: u64,
    seg: usize,
    s: f64,
    d_t: f64,
    phi: f64,
) -> ProjectionIdentity {
    ProjectionIdentity {
        participant_id: pid,
        segment_id: graph.segment(seg).id.clone(),
        segment_index: seg,
        projection: FrenetProjection { s, d_t, phi },
        probability: 1.0,
    }
}

// ---------------------------------------------------------------------------
// Relations: exhaustive enumeration

#[derive(Debug, Clone)]
pub struct Route {
    pub segs: Vec<usize>,
    pub kinds: Vec<RoadEdgeKind>,
}

impl Route {
    /// Arc-length position of `segs[k]`'s start, measured from the route start.
    fn offset(&self, graph: &RoadGraph, k: usize) -> f64 {
        (0..k)
            .filter(|&m| self.kinds[m] == RoadEdgeKind::Consecutive)
            .map(|m| graph.segment(self.segs[m]).centerline.length())
            .sum()
    }

    fn entered_length(&self, graph: &RoadGraph) -> f64 {
        self.segs[1..]
            .iter()
            .map(|&s| graph.segment(s).centerline.length())
            .sum()
    }
}

fn moves(graph: &RoadGraph) -> Vec<Vec<(usize, RoadEdgeKind)>> {
    let mut out = vec![Vec::new(); graph.len()];
    let ix = |s: &str| graph.segment_index(s).unwrap();
    for e in graph.edges() {
        let (a, b) = (ix(&e.from), ix(&e.to));
        match e.kind {
            RoadEdgeKind::Consecutive => out[a].push((b, e.kind)),
            RoadEdgeKind::Adjacent => {
                out[a].push((b, e.kind));
                out[b].push((a, e.kind));
            }
            RoadEdgeKind::Overlapping => {}
        }
    }
    out
}

/// Every simple route from `start` with at most one adjacent step, then
/// filtered to those whose entered segments sum to at most `bound`.
pub fn all_routes(graph: &RoadGraph, start: usize, bound: f64) -> Vec<Route> {
    fn dfs(moves: &[Vec<(usize, RoadEdgeKind)>], route: &mut Route, out: &mut Vec<Route>) {
        out.push(route.clone());
        let last = *route.segs.last().unwrap();
        let sides = route
            .kinds
            .iter()
            .filter(|&&k| k == RoadEdgeKind::Adjacent)
            .count();
        for &(next, kind) in &moves[last] {
            if route.segs.contains(&next) || (kind == RoadEdgeKind::Adjacent && sides > 0) {
                continue;
            }
            route.segs.push(next);
            route.kinds.push(kind);
            dfs(moves, route, out);
            route.segs.pop();
            route.kinds.pop();
        }
    }
    let mv = moves(graph);
    let mut out = Vec::new();
    dfs(
        &mv,
        &mut Route {
            segs: vec![start],
            kinds: vec![],
        },
        &mut out,
    );
    out.retain(|r| r.entered_length(graph) <= bound);
    out
}

fn keep_min(slot: &mut Option<f64>, d: f64) {
    let better = match *slot {
        None => true,
        Some(cur) => d.abs() < cur.abs() || (d.abs() == cur.abs() && d < cur),
    };
    if better {
        *slot = Some(d);
    }
}

/// Relations from an identity at `(a, s_i)` to one at `(b, s_j)`: the
/// closest distance per class over every combination of legal routes.
pub fn oracle_relations(
    graph: &RoadGraph,
    bound: f64,
    tolerance: f64,
    (a, s_i): (usize, f64),
    (b, s_j): (usize, f64),
) -> BTreeMap<RelationClass, f64> {
    let ix = |s: &str| graph.segment_index(s).unwrap();
    let overlapping: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .filter(|e| e.kind == RoadEdgeKind::Overlapping)
        .flat_map(|e| [(ix(&e.from), ix(&e.to)), (ix(&e.to), ix(&e.from))])
        .collect();

    let from_a = all_routes(graph, a, bound);
    let from_b = all_routes(graph, b, bound);
    let mut lon = None;
    let mut lat = None;
    let mut int = None;
    for ri in &from_a {
        for k in 0..ri.segs.len() {
            let sides = ri.kinds[..k]
                .iter()
                .filter(|&&x| x == RoadEdgeKind::Adjacent)
                .count();
            let off = ri.offset(graph, k);
            if ri.segs[k] == b {
                let d = off + s_j - s_i;
                match sides {
                    0 => keep_min(&mut lon, d),
                    1 => keep_min(&mut lat, d),
                    _ => {}
                }
            }
            for rj in &from_b {
                for m in 0..rj.segs.len() {
                    let (u, v) = (ri.segs[k], rj.segs[m]);
                    if !overlapping.contains(&(u, v)) {
                        continue;
                    }
                    let j_sides = rj.kinds[..m]
                        .iter()
                        .filter(|&&x| x == RoadEdgeKind::Adjacent)
                        .count();
                    if sides > 1 || j_sides > 1 {
                        continue;
                    }
                    if let Ok(s_x) = overlap_arc_length(graph, u, v, tolerance) {
                        keep_min(&mut int, off + s_x - s_i);
                    }
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (class, d) in [
        (RelationClass::Longitudinal, lon),
        (RelationClass::Lateral, lat),
        (RelationClass::Intersecting, int),
    ] {
        if let Some(d) = d {
            out.insert(class, d);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// DOT grammar

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Arrow,
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "{}[];,=".contains(c) {
            out.push(Tok::Punct(c));
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Tok::Arrow);
            i += 2;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => {
                        let next = *chars.get(i + 1).ok_or("dangling escape")?;
                        s.push(if next == 'n' { '\n' } else { next });
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(Tok::Id(s));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Id(chars[start..i].iter().collect()));
        } else if c == '-' || c == '.' || c.is_ascii_digit() {
            // numeral: -?(.[0-9]+ | [0-9]+(.[0-9]*)?)
            let start = i;
            if c == '-' {
                i += 1;
            }
            let int_start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_digits = i - int_start;
            let mut frac_digits = 0;
            if chars.get(i) == Some(&'.') {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                    frac_digits += 1;
                }
            }
            if int_digits == 0 && frac_digits == 0 {
                return Err(format!("bad numeral at offset {start}"));
            }
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err(format!("numeral runs into identifier at offset {start}"));
            }
            out.push(Tok::Id(chars[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

pub type Attrs = BTreeMap<String, String>;

#[derive(Debug, Clone, Default)]
pub struct DotDocument {
    pub name: String,
    pub nodes: Vec<(String, Attrs)>,
    pub edges: Vec<(String, String, Attrs)>,
}

const KEYWORDS: [&str; 6] = ["node", "edge", "graph", "digraph", "subgraph", "strict"];

/// Checks a document against the subset of the Graphviz grammar needed for
/// flat directed graphs and returns its statements.
pub fn parse_dot(text: &str) -> Result<DotDocument, String> {
    let toks = tokenize(text)?;
    let mut pos = 0;
    let next = |pos: &mut usize| -> Option<Tok> {
        let t = toks.get(*pos).cloned();
        *pos += 1;
        t
    };
    let ident = |t: Option<Tok>| -> Result<String, String> {
        match t {
            Some(Tok::Id(s)) if !KEYWORDS.contains(&s.to_ascii_lowercase().as_str()) => Ok(s),
            other => Err(format!("expected identifier, got {other:?}")),
        }
    };

    match next(&mut pos) {
        Some(Tok::Id(k)) if k.eq_ignore_ascii_case("digraph") => {}
        other => return Err(format!("expected digraph, got {other:?}")),
    }
    let mut doc = DotDocument::default();
    if let Some(Tok::Id(_)) = toks.get(pos) {
        doc.name = ident(next(&mut pos))?;
    }
    if next(&mut pos) != Some(Tok::Punct('{')) {
        return Err("expected {".into());
    }
    loop {
        match toks.get(pos) {
            Some(Tok::Punct('}')) => {
                pos += 1;
                break;
            }
            Some(Tok::Punct(';')) => pos += 1,
            Some(Tok::Id(_)) => {
                let a = ident(next(&mut pos))?;
                let target = if toks.get(pos) == Some(&Tok::Arrow) {
                    pos += 1;
                    Some(ident(next(&mut pos))?)
                } else {
                    None
                };
                let mut attrs = Attrs::new();
                if toks.get(pos) == Some(&Tok::Punct('[')) {
                    pos += 1;
                    loop {
                        match toks.get(pos) {
                            Some(Tok::Punct(']')) => {
                                pos += 1;
                                break;
                            }
                            Some(Tok::Punct(',')) | Some(Tok::Punct(';')) => pos += 1,
                            _ => {
                                let k = ident(next(&mut pos))?;
                                if next(&mut pos) != Some(Tok::Punct('=')) {
                                    return Err(format!("expected = after {k}"));
                                }
                                let v = match next(&mut pos) {
                                    Some(Tok::Id(v)) => v,
                                    other => return Err(format!("bad value {other:?}")),
                                };
                                if attrs.insert(k.clone(), v).is_some() {
                                    return Err(format!("repeated attribute {k}"));
                                }
                            }
                        }
                    }
                }
                match target {
                    Some(b) => doc.edges.push((a, b, attrs)),
                    None => doc.nodes.push((a, attrs)),
                }
            }
            other => return Err(format!("unexpected token {other:?}")),
        }
    }
    if pos != toks.len() {
        return Err("trailing tokens after closing brace".into());
    }
    Ok(doc)
}

// ---------------------------------------------------------------------------
// Dataset files

#[derive(Debug, Clone, Default)]
pub struct DatasetTables {
    pub a: Vec<(usize, usize)>,
    pub graph_indicator: Vec<usize>,
    pub node_attributes: Vec<Vec<f64>>,
    pub edge_attributes: Vec<Vec<f64>>,
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .map(str::to_string)
        .collect()
}

fn numbers<T: std::str::FromStr>(line: &str) -> Vec<T>
where
    T::Err: std::fmt::Debug,
{
    line.split(',').map(|f| f.trim().parse().unwrap()).collect()
}

/// Reads `<prefix>_A.txt` and its three companions.
pub fn read_dataset(prefix: &Path) -> DatasetTables {
    let file = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    DatasetTables {
        a: lines(&file("_A.txt"))
            .iter()
            .map(|l| {
                let v: Vec<usize> = numbers(l);
                assert_eq!(v.len(), 2, "adjacency row {l:?}");
                (v[0], v[1])
            })
            .collect(),
        graph_indicator: lines(&file("_graph_indicator.txt"))
            .iter()
            .map(|l| l.trim().parse().unwrap())
            .collect(),
        node_attributes: lines(&file("_node_attributes.txt"))
            .iter()
            .map(|l| numbers(l))
            .collect(),
        edge_attributes: lines(&file("_edge_attributes.txt"))
            .iter()
            .map(|l| numbers(l))
            .collect(),
    }
}

/// Value as it reads back after six-decimal serialization.
pub fn six_decimals(v: f64) -> f64 {
    format!("{v:.6}").parse().unwrap()
}
