//! Command-line front end: `build`, `validate-map` and `stats`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::export::{export_dataset, to_dot};
use crate::frenet::MatchParams;
use crate::ingest::{parse_object_list, Recording};
use crate::map_model::{audit_overlaps, parse_map, RoadGraph, DEFAULT_OVERLAP_TOLERANCE};
use crate::matching::{match_participant, MatchConfig};
use crate::relations::{PathSearchConfig, RelationClass};
use crate::scene_graph::{SceneDiagnostics, SceneGraph, SceneGraphBuilder};

/// Prefix of the dataset files inside the output directory.
pub const DATASET_PREFIX: &str = "scene_graphs";

#[derive(Debug, Parser)]
#[command(
    name = "ssg",
    version,
    about = "Build semantic scene graphs from object lists and a lane map"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one scene graph per timestep and export them.
    Build(BuildArgs),
    /// Parse a map and cross-check declared overlaps against geometry.
    ValidateMap(ValidateArgs),
    /// Summarize relations and matching over a recording.
    Stats(InputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Dot,
    Tudataset,
    Both,
}

impl Format {
    fn dot(self) -> bool {
        matches!(self, Format::Dot | Format::Both)
    }

    fn dataset(self) -> bool {
        matches!(self, Format::Tudataset | Format::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Road map (JSON).
    #[arg(long)]
    pub map: PathBuf,
    /// Object list (CSV).
    #[arg(long)]
    pub objects: PathBuf,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// First timestamp to process, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub from_ms: Option<i64>,
    /// Last timestamp to process, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub to_ms: Option<i64>,
    #[arg(long)]
    pub sigma_d: Option<f64>,
    #[arg(long)]
    pub sigma_p: Option<f64>,
    /// Largest lateral offset at which a vehicle is matched to a lane.
    #[arg(long)]
    pub max_lateral: Option<f64>,
    /// Smallest matching probability kept for vehicles.
    #[arg(long)]
    pub min_prob: Option<f64>,
    /// Bound on the summed segment length of a route.
    #[arg(long)]
    pub max_path_length: Option<f64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Largest centerline gap still counted as an overlap.
    #[arg(long, default_value_t = DEFAULT_OVERLAP_TOLERANCE)]
    pub overlap_tolerance: f64,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub format: Option<Format>,
    pub from_ms: Option<i64>,
    pub to_ms: Option<i64>,
    pub sigma_d: Option<f64>,
    pub sigma_p: Option<f64>,
    pub max_lateral: Option<f64>,
    pub min_prob: Option<f64>,
    pub pedestrian_radius: Option<f64>,
    pub pedestrian_max_segments: Option<usize>,
    pub max_path_length: Option<f64>,
    pub overlap_tolerance: Option<f64>,
    pub jobs: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub map: PathBuf,
    pub objects: PathBuf,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub from_ms: Option<i64>,
    pub to_ms: Option<i64>,
    pub match_config: MatchConfig,
    pub path_config: PathSearchConfig,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn resolve(input: &InputArgs, out: Option<&Path>, format: Option<Format>) -> Result<Self> {
        let file = match &input.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let defaults = MatchConfig::default();
        let path_defaults = PathSearchConfig::default();
        let match_config = MatchConfig {
            match_params: MatchParams {
                sigma_d: input
                    .sigma_d
                    .or(file.sigma_d)
                    .unwrap_or(defaults.match_params.sigma_d),
                sigma_p: input
                    .sigma_p
                    .or(file.sigma_p)
                    .unwrap_or(defaults.match_params.sigma_p),
            },
            max_lateral_distance: input
                .max_lateral
                .or(file.max_lateral)
                .unwrap_or(defaults.max_lateral_distance),
            min_probability: input
                .min_prob
                .or(file.min_prob)
                .unwrap_or(defaults.min_probability),
            pedestrian_radius: file.pedestrian_radius.unwrap_or(defaults.pedestrian_radius),
            pedestrian_max_segments: file
                .pedestrian_max_segments
                .unwrap_or(defaults.pedestrian_max_segments),
        };
        let path_config = PathSearchConfig {
            max_total_length: input
                .max_path_length
                .or(file.max_path_length)
                .unwrap_or(path_defaults.max_total_length),
            overlap_tolerance: file
                .overlap_tolerance
                .unwrap_or(path_defaults.overlap_tolerance),
        };
        let config = RunConfig {
            map: input.map.clone(),
            objects: input.objects.clone(),
            out: out.map(Path::to_path_buf),
            format: format.or(file.format).unwrap_or(Format::Both),
            from_ms: input.from_ms.or(file.from_ms),
            to_ms: input.to_ms.or(file.to_ms),
            match_config,
            path_config,
            jobs: input.jobs.or(file.jobs),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.map.as_os_str().is_empty() || self.objects.as_os_str().is_empty() {
            bail!("input paths must not be empty");
        }
        if self.out.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
            bail!("output directory must not be empty");
        }
        if let (Some(from), Some(to)) = (self.from_ms, self.to_ms) {
            if from > to {
                bail!("--from-ms {from} is after --to-ms {to}");
            }
        }
        self.match_config.validate()?;
        let bound = self.path_config.max_total_length;
        if !(bound.is_finite() && bound >= 0.0) {
            bail!("max path length must be finite and non-negative, got {bound}");
        }
        let tol = self.path_config.overlap_tolerance;
        if !(tol.is_finite() && tol >= 0.0) {
            bail!("overlap tolerance must be finite and non-negative, got {tol}");
        }
        if self.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        Ok(())
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Build(args) => {
            let config = RunConfig::resolve(&args.input, Some(&args.out), args.format)?;
            cmd_build(&config, out)
        }
        Command::ValidateMap(args) => cmd_validate_map(&args.map, args.overlap_tolerance, out),
        Command::Stats(input) => {
            let config = RunConfig::resolve(&input, None, None)?;
            cmd_stats(&config, out)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_map(path: &Path) -> Result<RoadGraph> {
    parse_map(&read(path)?).with_context(|| format!("invalid map {}", path.display()))
}

struct Loaded {
    road: RoadGraph,
    recording: Recording,
}

fn load(config: &RunConfig) -> Result<Loaded> {
    let road = load_map(&config.map)?;
    let recording = parse_object_list(&read(&config.objects)?)
        .with_context(|| format!("invalid object list {}", config.objects.display()))?
        .in_range(config.from_ms, config.to_ms);
    if recording.is_empty() {
        eprintln!("warning: no scenes in the selected time range");
    }
    Ok(Loaded { road, recording })
}

fn build_graphs(config: &RunConfig, data: &Loaded) -> Result<(Vec<SceneGraph>, SceneDiagnostics)> {
    let builder = SceneGraphBuilder::new(&data.road, config.match_config, config.path_config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .context("cannot start worker pool")?;
    Ok(pool.install(|| builder.build_recording(&data.recording)))
}

fn class_counts(graphs: &[SceneGraph]) -> [usize; 3] {
    let mut counts = [0; 3];
    for e in graphs.iter().flat_map(|g| &g.edges) {
        counts[e.relation_class.one_hot_index()] += 1;
    }
    counts
}

fn write_class_counts(out: &mut dyn Write, counts: &[usize; 3]) -> std::io::Result<()> {
    for class in RelationClass::ALL {
        writeln!(
            out,
            "  {}: {}",
            class.as_str(),
            counts[class.one_hot_index()]
        )?;
    }
    Ok(())
}

pub fn cmd_build(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let data = load(config)?;
    let (graphs, diag) = build_graphs(config, &data)?;

    let dir = config
        .out
        .as_deref()
        .context("build needs an output directory")?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    if config.format.dot() {
        for g in &graphs {
            let path = dir.join(format!("scene_{}.dot", g.timestamp));
            fs::write(&path, to_dot(g))
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    if config.format.dataset() {
        if graphs.is_empty() {
            eprintln!("warning: no graphs built; dataset files not written");
        } else {
            export_dataset(&graphs, &data.road, &dir.join(DATASET_PREFIX))?;
        }
    }

    let counts = class_counts(&graphs);
    writeln!(out, "scenes processed: {}", graphs.len())?;
    writeln!(out, "participants: {}", diag.participants)?;
    writeln!(out, "participants filtered: {}", diag.unmatched)?;
    writeln!(out, "edges: {}", counts.iter().sum::<usize>())?;
    write_class_counts(out, &counts)?;
    if diag.skipped_overlaps > 0 {
        writeln!(
            out,
            "intersections skipped (no geometric overlap): {}",
            diag.skipped_overlaps
        )?;
    }
    Ok(())
}

pub fn cmd_validate_map(path: &Path, tolerance: f64, out: &mut dyn Write) -> Result<()> {
    let road = load_map(path)?;
    writeln!(out, "segments: {}", road.len())?;
    writeln!(out, "edges: {}", road.edges().len())?;
    let audit = audit_overlaps(&road, tolerance);
    for (a, b) in &audit.undeclared {
        writeln!(
            out,
            "warning: {a} and {b} overlap geometrically but no overlapping edge is declared"
        )?;
    }
    for (a, b) in &audit.disjoint {
        writeln!(
            out,
            "warning: declared overlap {a} ~ {b} has no geometric meeting point"
        )?;
    }
    writeln!(
        out,
        "overlap audit: {} undeclared, {} disjoint",
        audit.undeclared.len(),
        audit.disjoint.len()
    )?;
    Ok(())
}

/// Lower edge of the 10 m bin holding `d`.
fn bin(d: f64) -> i64 {
    (d / 10.0).floor() as i64 * 10
}

fn write_histogram(
    out: &mut dyn Write,
    name: &str,
    hist: &BTreeMap<i64, usize>,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{name} histogram (10 m bins): {} values",
        hist.values().sum::<usize>()
    )?;
    for (lo, n) in hist {
        writeln!(out, "  [{lo}, {}): {n}", lo + 10)?;
    }
    Ok(())
}

pub fn cmd_stats(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let data = load(config)?;
    let (graphs, diag) = build_graphs(config, &data)?;

    let mut d_f = BTreeMap::new();
    let mut d_ip = BTreeMap::new();
    for e in graphs.iter().flat_map(|g| &g.edges) {
        if let Some(d) = e.d_f {
            *d_f.entry(bin(d)).or_insert(0) += 1;
        }
        if let Some(d) = e.d_ip {
            *d_ip.entry(bin(d)).or_insert(0) += 1;
        }
    }
    let mut identities: BTreeMap<usize, usize> = BTreeMap::new();
    for scene in data.recording.scenes() {
        for p in &scene.participants {
            let n = match_participant(p, &data.road, &config.match_config).len();
            *identities.entry(n).or_insert(0) += 1;
        }
    }

    let counts = class_counts(&graphs);
    writeln!(out, "scenes: {}", graphs.len())?;
    writeln!(out, "participant observations: {}", diag.participants)?;
    writeln!(out, "relation classes: {}", counts.iter().sum::<usize>())?;
    write_class_counts(out, &counts)?;
    write_histogram(out, "d_F", &d_f)?;
    write_histogram(out, "d_ip", &d_ip)?;
    writeln!(out, "identities per participant:")?;
    for (n, count) in &identities {
        writeln!(out, "  {n}: {count}")?;
    }
    Ok(())
}
