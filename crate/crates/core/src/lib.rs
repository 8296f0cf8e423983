//! Cell decompositions of semi-linear sets and the deformation retractions
//! built on them.

pub mod cell;
pub mod decomposition;
pub mod error;
pub mod generate;
pub mod oracle;
pub mod retraction;
pub mod scalar;

pub use cell::{CornerLabel, HalfCell, HalfStage, Label, LinearCell, SigmaLabel, Stage};
pub use error::{Error, Result};
pub use oracle::{Constraint, LinearSystem, Rel};
pub use scalar::{AffineMap, ExtAffine, Order, Point, Scalar};
pub use decomposition::{Carrier, Decomposition, Formula, SemiLinearSet};
pub use retraction::{Deformation, PlPath};
