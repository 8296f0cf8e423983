use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::{int, serde_point, serde_scalar, Point, Scalar};

use super::Deformation;

/// Sampled values of a deformation, for plotting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    #[serde(with = "serde_scalar")]
    pub q: Scalar,
    pub samples: Vec<TraceSample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSample {
    #[serde(with = "serde_scalar")]
    pub t: Scalar,
    #[serde(with = "serde_point")]
    pub x: Point,
    #[serde(rename = "Hx", with = "serde_point")]
    pub hx: Point,
}

/// `H(t, x)` for each point at `steps + 1` equally spaced times.
pub fn trace(h: &impl Deformation, points: &[Point], steps: usize) -> Result<Trace> {
    let q = h.q().clone();
    let steps = steps.max(1);
    let mut samples = Vec::with_capacity(points.len() * (steps + 1));
    for x in points {
        for i in 0..=steps {
            let t = &q * int(i as i64) / int(steps as i64);
            let hx = h.eval(&t, x)?;
            samples.push(TraceSample { t, x: x.clone(), hx });
        }
    }
    Ok(Trace { q, samples })
}
