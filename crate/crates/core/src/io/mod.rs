//! JSON / NDJSON documents for every artifact that crosses a process boundary.
//!
//! Documents are written in a canonical layout: top-level members and the
//! elements of top-level arrays each on their own line, everything deeper
//! compact. Floats use the shortest representation that parses back to the
//! same `f64`, so `write(read(doc)) == doc` for anything this module wrote.

use std::io::Write;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::Formatter;
use thiserror::Error;

pub mod clip;
pub mod log;
pub mod motion;
pub mod skeleton;
pub mod spec;
pub mod trajectory;

pub use clip::{read_clip, write_clip, ClipFrame, RetargetedClip, CLIP_FPS};
pub use log::{
    read_log, write_log, Event, EventKind, LogHeader, LogSummary, PredictionRecord, RunOutcome,
    ScenarioLog, TrackSample,
};
pub use motion::{read_motion, write_motion, MotionFrame, MotionSequence};
pub use skeleton::{read_skeleton_map, write_skeleton_map, JointMapping, SkeletonMap};
pub use spec::{
    read_scenario_spec, write_scenario_spec, EgoSpec, ObstacleSpec, PedestrianCounts, PedestrianSpec,
    Role, ScenarioSpec, SimSettings, SpawnPose, TriggerSpec, VehicleSpec,
};
pub use trajectory::{read_trajectory, write_trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("parse error at `{field}`{}: {message}", frame.map(|f| format!(" (frame {f})")).unwrap_or_default())]
    Parse { field: String, frame: Option<usize>, message: String },
    #[error("validation error [{code}]: {message}")]
    Validation { code: &'static str, message: String },
}

impl FormatError {
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::Parse { .. } => "parse_error",
            FormatError::Validation { code, .. } => code,
        }
    }

    pub(crate) fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        FormatError::Validation { code, message: message.into() }
    }

    pub(crate) fn parse_at(field: impl Into<String>, frame: Option<usize>, message: impl Into<String>) -> Self {
        FormatError::Parse { field: field.into(), frame, message: message.into() }
    }
}

/// Index of the first `frames[i]` segment in a serde path, if any.
fn frame_index(path: &str) -> Option<usize> {
    let start = path.find("frames[")? + "frames[".len();
    let end = path[start..].find(']')? + start;
    path[start..end].parse().ok()
}

pub fn from_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let frame = frame_index(&path);
        FormatError::parse_at(path, frame, e.into_inner().to_string())
    })
}

/// Pretty-prints the two outermost nesting levels and writes everything below compactly.
struct CanonicalFormatter {
    depth: usize,
    has_value: bool,
}

const PRETTY_DEPTH: usize = 2;

impl CanonicalFormatter {
    fn pretty(&self) -> bool {
        self.depth <= PRETTY_DEPTH
    }

    fn newline<W: ?Sized + Write>(&self, w: &mut W, depth: usize) -> std::io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..depth {
            w.write_all(b"  ")?;
        }
        Ok(())
    }

    fn open<W: ?Sized + Write>(&mut self, w: &mut W, token: &[u8]) -> std::io::Result<()> {
        self.depth += 1;
        self.has_value = false;
        w.write_all(token)
    }

    fn close<W: ?Sized + Write>(&mut self, w: &mut W, token: &[u8]) -> std::io::Result<()> {
        let was_pretty = self.pretty();
        self.depth -= 1;
        if was_pretty && self.has_value {
            self.newline(w, self.depth)?;
        }
        w.write_all(token)
    }

    fn element<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        if self.pretty() {
            self.newline(w, self.depth)?;
        }
        Ok(())
    }
}

impl Formatter for CanonicalFormatter {
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.open(w, b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.close(w, b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.element(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> std::io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.open(w, b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.close(w, b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.element(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        w.write_all(if self.pretty() { b": " } else { b":" })
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> std::io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

/// Serializes `value` in the canonical document layout, newline-terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter { depth: 0, has_value: false });
    value.serialize(&mut ser).expect("in-memory serialization of plain data cannot fail");
    out.push(b'\n');
    out
}

pub(crate) fn ensure_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<(), FormatError> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(FormatError::invalid("non_finite", format!("non-finite number in {what}")))
    }
}
