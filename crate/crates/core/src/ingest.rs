//! Object-list recordings: one CSV row per participant and timestep.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::geometry::wrap_angle;

pub const CSV_HEADER: [&str; 12] = [
    "timestamp_ms",
    "track_id",
    "class",
    "x",
    "y",
    "psi",
    "vx",
    "vy",
    "ax",
    "ay",
    "width",
    "length",
];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("object list is empty; expected header `{}`", CSV_HEADER.join(","))]
    MissingHeader,
    #[error("unexpected header `{found}`; expected `{}`", CSV_HEADER.join(","))]
    BadHeader { found: String },
    #[error("line {line}: expected {} fields, found {found}", CSV_HEADER.len())]
    Arity { line: u64, found: usize },
    #[error("line {line}: field `{field}` has invalid value {value:?}")]
    Field {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: {reason}")]
    Invalid { line: u64, reason: String },
    #[error("line {line}: participant {participant} appears twice at timestamp {timestamp}")]
    DuplicateParticipant {
        line: u64,
        timestamp: i64,
        participant: u64,
    },
    #[error("object list is not valid CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum SceneLookupError {
    #[error("recording is empty; no scene at {0} ms")]
    Empty(i64),
    #[error("no scene at {requested} ms (nearest available: {})", nearest(.before, .after))]
    Missing {
        requested: i64,
        before: Option<i64>,
        after: Option<i64>,
    },
}

fn nearest(before: &Option<i64>, after: &Option<i64>) -> String {
    [before, after]
        .iter()
        .filter_map(|t| t.map(|t| format!("{t} ms")))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Car,
    Pedestrian,
    Bike,
    Truck,
    Other,
}

impl ObjectClass {
    /// One-hot order used by the numeric export.
    pub const ALL: [ObjectClass; 5] = [
        ObjectClass::Car,
        ObjectClass::Pedestrian,
        ObjectClass::Bike,
        ObjectClass::Truck,
        ObjectClass::Other,
    ];

    /// Case-insensitive; anything unrecognized is `Other`.
    pub fn parse(s: &str) -> ObjectClass {
        match s.trim().to_ascii_lowercase().as_str() {
            "car" => ObjectClass::Car,
            "pedestrian" => ObjectClass::Pedestrian,
            "bike" => ObjectClass::Bike,
            "truck" => ObjectClass::Truck,
            _ => ObjectClass::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Car => "car",
            ObjectClass::Pedestrian => "pedestrian",
            ObjectClass::Bike => "bike",
            ObjectClass::Truck => "truck",
            ObjectClass::Other => "other",
        }
    }

    pub fn one_hot_index(self) -> usize {
        self as usize
    }
}

/// One participant at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficParticipantState {
    pub participant_id: u64,
    /// Geometric center (m).
    pub x: f64,
    pub y: f64,
    /// Body yaw in (-pi, pi].
    pub psi: f64,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    pub width: f64,
    pub length: f64,
    pub object_class: ObjectClass,
}

impl TrafficParticipantState {
    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub timestamp: i64,
    pub participants: Vec<TrafficParticipantState>,
}

/// Scenes in strictly increasing timestamp order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Recording {
    scenes: Vec<SceneState>,
}

impl Recording {
    /// Sorts by timestamp; merges nothing, so timestamps must already be unique.
    pub fn from_scenes(mut scenes: Vec<SceneState>) -> Self {
        scenes.sort_by_key(|s| s.timestamp);
        debug_assert!(scenes.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        Recording { scenes }
    }

    pub fn scenes(&self) -> &[SceneState] {
        &self.scenes
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    pub fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        self.scenes.iter().map(|s| s.timestamp)
    }

    /// Scenes with `from <= t <= to`.
    pub fn in_range(&self, from: Option<i64>, to: Option<i64>) -> Recording {
        let scenes = self
            .scenes
            .iter()
            .filter(|s| from.is_none_or(|f| s.timestamp >= f))
            .filter(|s| to.is_none_or(|t| s.timestamp <= t))
            .cloned()
            .collect();
        Recording { scenes }
    }
}

/// Exact lookup; no interpolation.
pub fn scene_at(recording: &Recording, timestamp: i64) -> Result<&SceneState, SceneLookupError> {
    let scenes = &recording.scenes;
    if scenes.is_empty() {
        return Err(SceneLookupError::Empty(timestamp));
    }
    match scenes.binary_search_by_key(&timestamp, |s| s.timestamp) {
        Ok(i) => Ok(&scenes[i]),
        Err(i) => Err(SceneLookupError::Missing {
            requested: timestamp,
            before: i.checked_sub(1).map(|j| scenes[j].timestamp),
            after: scenes.get(i).map(|s| s.timestamp),
        }),
    }
}

fn field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    line: u64,
    column: usize,
) -> Result<T, IngestError> {
    let raw = record[column].trim();
    raw.parse().map_err(|_| IngestError::Field {
        line,
        field: CSV_HEADER[column],
        value: raw.to_string(),
    })
}

/// Parses an object-list CSV into a recording grouped by timestamp.
pub fn parse_object_list(text: &str) -> Result<Recording, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(IngestError::MissingHeader),
    };
    if header.len() != CSV_HEADER.len() || header.iter().zip(CSV_HEADER).any(|(h, e)| h.trim() != e)
    {
        return Err(IngestError::BadHeader {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut grouped: BTreeMap<i64, Vec<TrafficParticipantState>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != CSV_HEADER.len() {
            return Err(IngestError::Arity {
                line,
                found: record.len(),
            });
        }
        let timestamp: i64 = field(&record, line, 0)?;
        let participant_id: u64 = field(&record, line, 1)?;
        let object_class = ObjectClass::parse(&record[2]);
        let mut nums = [0.0f64; 9];
        for (k, slot) in nums.iter_mut().enumerate() {
            *slot = field(&record, line, k + 3)?;
            if !slot.is_finite() {
                return Err(IngestError::Invalid {
                    line,
                    reason: format!("field `{}` is not finite", CSV_HEADER[k + 3]),
                });
            }
        }
        let [x, y, psi, vx, vy, ax, ay, width, length] = nums;
        if width <= 0.0 || length <= 0.0 {
            return Err(IngestError::Invalid {
                line,
                reason: format!("bounding box must be positive, got {width} x {length}"),
            });
        }
        if !seen.insert((timestamp, participant_id)) {
            return Err(IngestError::DuplicateParticipant {
                line,
                timestamp,
                participant: participant_id,
            });
        }
        grouped
            .entry(timestamp)
            .or_default()
            .push(TrafficParticipantState {
                participant_id,
                x,
                y,
                psi: wrap_angle(psi),
                vx,
                vy,
                ax,
                ay,
                width,
                length,
                object_class,
            });
    }

    Ok(Recording {
        scenes: grouped
            .into_iter()
            .map(|(timestamp, participants)| SceneState {
                timestamp,
                participants,
            })
            .collect(),
    })
}
