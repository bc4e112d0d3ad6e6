//! JSON domain files.
//!
//! Two shapes are accepted:
//!
//! ```json
//! {"generator": "grid_loop", "params": {"w": 4, "h": 5}}
//! {"states": ["x", "y"], "actions": [{"a": "go", "b": "stay", "from": 0, "to": 1}]}
//! ```
//!
//! Unknown fields are rejected in both.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DomainSpec, ExplicitGraph, Model};
use crate::error::{Error, Result};

/// Serialized form of a [`DomainSpec`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainFile {
    Generator(GeneratorStanza),
    Explicit(ExplicitGraph),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    tag = "generator",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum GeneratorStanza {
    Ring(RingParams),
    GridLoop(GridParams),
    TurnAndOpen(TurnAndOpenParams),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingParams {
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub w: usize,
    pub h: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnAndOpenParams {
    #[serde(default = "two_rooms")]
    pub rooms: usize,
    pub balls: usize,
}

fn two_rooms() -> usize {
    2
}

impl DomainFile {
    pub fn from_spec(spec: &DomainSpec) -> Self {
        match &spec.model {
            Model::Ring { n } => DomainFile::Generator(GeneratorStanza::Ring(RingParams { n: *n })),
            Model::GridLoop { w, h } => DomainFile::Generator(GeneratorStanza::GridLoop(GridParams { w: *w, h: *h })),
            Model::TurnAndOpen { rooms, balls } => {
                DomainFile::Generator(GeneratorStanza::TurnAndOpen(TurnAndOpenParams {
                    rooms: *rooms,
                    balls: *balls,
                }))
            }
            Model::Explicit(g) => DomainFile::Explicit(g.clone()),
        }
    }

    pub fn into_spec(self) -> Result<DomainSpec> {
        match self {
            DomainFile::Generator(GeneratorStanza::Ring(p)) => DomainSpec::ring(p.n),
            DomainFile::Generator(GeneratorStanza::GridLoop(p)) => DomainSpec::grid_loop(p.w, p.h),
            DomainFile::Generator(GeneratorStanza::TurnAndOpen(p)) => DomainSpec::turn_and_open(p.rooms, p.balls),
            DomainFile::Explicit(g) => DomainSpec::explicit(g),
        }
    }

    /// Decode from a JSON value, dispatching on the `generator` key so that
    /// errors name the offending field instead of "no variant matched".
    pub fn from_value(value: serde_json::Value, context: &str) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::parse(context, "domain must be a JSON object"))?;
        if obj.contains_key("generator") {
            serde_json::from_value(value)
                .map(DomainFile::Generator)
                .map_err(|e| Error::parse(context, e))
        } else {
            serde_json::from_value(value)
                .map(DomainFile::Explicit)
                .map_err(|e| Error::parse(context, e))
        }
    }
}

/// Parse domain JSON text. Diagnostics carry line and column from the decoder.
pub fn parse_domain(text: &str, context: &str) -> Result<DomainSpec> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse(context, e))?;
    let is_generator = value.get("generator").is_some();
    // Re-decode from text so field errors keep their line/column.
    let file = if is_generator {
        serde_json::from_str::<GeneratorStanza>(text).map(DomainFile::Generator)
    } else {
        serde_json::from_str::<ExplicitGraph>(text).map(DomainFile::Explicit)
    }
    .map_err(|e| Error::parse(context, e))?;
    file.into_spec()
}

pub fn render_domain(spec: &DomainSpec) -> String {
    serde_json::to_string_pretty(&DomainFile::from_spec(spec)).expect("domain serializes")
}

pub fn load_domain(path: impl AsRef<Path>) -> Result<DomainSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_domain(&text, &path.display().to_string())
}

pub fn save_domain(spec: &DomainSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_domain(spec) + "\n").map_err(|e| Error::io(path, e))
}
