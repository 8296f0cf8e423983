//! Deformation retractions of cells and stars of special decompositions.

use rand::RngCore;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Point, Scalar};

mod canonical;
mod contraction;
mod homotopy;
pub mod pl;
mod star;
mod trace;
mod transform;
mod verify;

pub use canonical::CanonicalRetraction;
pub use contraction::{contract, Contraction, HalfCellContraction};
pub use homotopy::{loop_homotopy, LoopHomotopy, PlPath};
pub use pl::{PiecewiseLinear, Trajectory};
pub use star::{common_corner, glue_star_retraction, CRetraction, GluedRetraction, SharedCorner};
pub use trace::{trace, Trace, TraceSample};
pub use transform::CornerTransform;
pub use verify::{
    verify_extension, verify_glued, verify_homotopy, verify_interior, verify_retraction, Failure, FailureKind,
    HomotopyReport,
    RetractionReport,
};

/// A map `H: [0, q] × X → X` from a domain onto a target it fixes.
pub trait Deformation {
    fn dim(&self) -> usize;

    fn q(&self) -> &Scalar;

    /// `H(t, x)`. Fails for `t ∉ [0, q]` or `x ∉ X`.
    fn eval(&self, t: &Scalar, x: &[Scalar]) -> Result<Point>;

    fn in_domain(&self, x: &[Scalar]) -> bool;

    /// Membership in the set `H(0, X)` is supposed to land in.
    fn in_target(&self, x: &[Scalar]) -> bool;

    fn sample_domain(&self, k: usize, rng: &mut dyn RngCore) -> Vec<Point>;

    fn sample_target(&self, k: usize, rng: &mut dyn RngCore) -> Vec<Point>;

    /// Closed-form least `t` with `H(t, x) = x`, when the map is nice.
    fn fixing_point(&self, _x: &[Scalar]) -> Option<Scalar> {
        None
    }

    /// `t ↦ H(t, x)` built independently of `eval`.
    fn trajectory(&self, _x: &[Scalar]) -> Option<Trajectory> {
        None
    }
}

pub(crate) fn check_time(t: &Scalar, q: &Scalar) -> Result<()> {
    if *t < Scalar::zero() || t > q {
        return Err(Error::TimeOutOfRange { t: t.to_string(), q: q.to_string() });
    }
    Ok(())
}

/// Deliberate defects, for checking that verification notices them.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mutation {
    #[default]
    None,
    /// `max` instead of `min` before the fixing time in Case II.
    CaseTwoMax,
    /// The `t` term is dropped in Case II.
    DropTimeTerm,
    /// The full upper map instead of its half.
    FullMap,
    /// The time bound is halved.
    ShortTime,
    /// The closed-form fixing point ignores the `F` term in Case II.
    AlphaDropsLastTerm,
    /// The glued map forgets to freeze each piece at its own time bound.
    NoClamp,
}
