//! Input files: formula lists, decompositions, retraction instances and traces.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;

use semilinear::retraction::Trace;
use semilinear::scalar::serde_points;
use semilinear::{CornerLabel, Decomposition, Formula, LinearCell, PlPath, Point, SemiLinearSet, SigmaLabel};

/// Sets to decompose `Rⁿ` against, optionally restricted to a carrier.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum SetsInput {
    Many {
        n: usize,
        sets: Vec<Formula>,
        #[serde(default)]
        carrier: Option<Formula>,
    },
    One(SemiLinearSet),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Instance {
    /// A canonical cell and the face label `σ` to retract onto.
    Canonical {
        cell: LinearCell,
        face: SigmaLabel,
        #[serde(default, with = "serde_points")]
        points: Vec<Point>,
    },
    /// A star, its center and a corner label of the center.
    Star {
        decomposition: Decomposition,
        center: usize,
        corner: CornerLabel,
        #[serde(default, with = "serde_points")]
        points: Vec<Point>,
        #[serde(default, rename = "loop")]
        path: Option<PlPath>,
    },
}

impl Instance {
    pub fn dim(&self) -> usize {
        match self {
            Instance::Canonical { cell, .. } => cell.dim(),
            Instance::Star { decomposition, .. } => decomposition.n,
        }
    }

    pub fn points(&self) -> &[Point] {
        match self {
            Instance::Canonical { points, .. } | Instance::Star { points, .. } => points,
        }
    }

    pub fn cells(&self) -> Vec<LinearCell> {
        match self {
            Instance::Canonical { cell, .. } => vec![cell.clone()],
            Instance::Star { decomposition, .. } => decomposition.cells.clone(),
        }
    }
}

pub enum AnyInput {
    Decomposition(Decomposition),
    Instance(Box<Instance>),
    Trace(Trace),
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

pub fn parse<T: for<'de> Deserialize<'de>>(v: Value, what: &str, path: &Path) -> Result<T> {
    serde_json::from_value(v).with_context(|| format!("{} is not a valid {what}", path.display()))
}

pub fn read<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T> {
    parse(read_json(path)?, what, path)
}

/// Reads a decomposition, an instance or a trace, told apart by their keys.
pub fn read_any(path: &Path) -> Result<AnyInput> {
    let v = read_json(path)?;
    let kind = v.get("kind").and_then(Value::as_str);
    if matches!(kind, Some("canonical" | "star")) {
        return Ok(AnyInput::Instance(Box::new(parse(v, "instance", path)?)));
    }
    if v.get("cells").is_some() {
        return Ok(AnyInput::Decomposition(parse(v, "decomposition", path)?));
    }
    if v.get("samples").is_some() && v.get("q").is_some() {
        return Ok(AnyInput::Trace(parse(v, "trace", path)?));
    }
    bail!("{}: expected a decomposition, a retraction instance or a trace", path.display())
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    match read_any(path)? {
        AnyInput::Instance(i) => Ok(*i),
        _ => bail!("{}: expected an instance with \"kind\": \"canonical\" or \"star\"", path.display()),
    }
}
