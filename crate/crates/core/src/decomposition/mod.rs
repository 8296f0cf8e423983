//! Linear decompositions of semi-linear sets: construction, the special
//! refinement, restriction to a carrier, stars, box clipping and the
//! validators for each of these.

mod cad;
mod checks;
mod clip;
mod formula;

use std::collections::HashMap;

use serde::de::Deserializer;
use serde::{Deserialize, Serialize, Serializer};

use crate::cell::LinearCell;
use crate::error::{Error, Result};
use crate::oracle::{bounding_box, feasible, uniform_sign, ClosedBox};
use crate::scalar::{max_scalar, min_scalar, Scalar};

pub use cad::{decompose, refine_special};
pub use checks::{
    check_frontier, check_partition, check_refinement, validate_special, FrontierReport, FrontierViolation,
    PartitionReport, RefinementReport, SpecialReport, SpecialViolation,
};
pub use clip::{clip_to_box, OpenBox};
pub use formula::{AtomRel, Formula, SemiLinearSet};

/// The set a decomposition partitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Carrier {
    All,
    Set(Formula),
}

impl Carrier {
    pub fn contains(&self, x: &[Scalar]) -> bool {
        match self {
            Carrier::All => true,
            Carrier::Set(f) => f.holds(x),
        }
    }

    pub fn formula(&self) -> Formula {
        match self {
            Carrier::All => Formula::True,
            Carrier::Set(f) => f.clone(),
        }
    }

    fn and(&self, f: Formula) -> Carrier {
        match self {
            Carrier::All => Carrier::Set(f),
            Carrier::Set(g) => Carrier::Set(Formula::and(vec![g.clone(), f])),
        }
    }
}

impl Serialize for Carrier {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Carrier::All => s.serialize_str("all"),
            Carrier::Set(f) => f.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Carrier {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Tag(String),
            Set(Formula),
        }
        match Repr::deserialize(d)? {
            Repr::Tag(t) if t == "all" => Ok(Carrier::All),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unknown carrier {t:?}"))),
            Repr::Set(f) => Ok(Carrier::Set(f)),
        }
    }
}

/// A finite partition of the carrier into linear cells of `Rⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub n: usize,
    pub carrier: Carrier,
    pub special: bool,
    pub cells: Vec<LinearCell>,
}

impl Decomposition {
    pub fn check_shape(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Arity { expected: 1, got: 0 });
        }
        if let Some(c) = self.cells.iter().find(|c| c.dim() != self.n) {
            return Err(Error::Arity { expected: self.n, got: c.dim() });
        }
        if let Carrier::Set(f) = &self.carrier {
            f.check_arity(self.n)?;
        }
        Ok(())
    }

    pub fn cell(&self, index: usize) -> Result<&LinearCell> {
        self.cells.get(index).ok_or(Error::OutOfRange { index, limit: self.cells.len() })
    }

    /// Index of the cell containing `x`, if any.
    pub fn find_cell(&self, x: &[Scalar]) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x).unwrap_or(false))
    }

    pub fn union_contains(&self, x: &[Scalar]) -> bool {
        self.find_cell(x).is_some()
    }

    /// Indices of the cells whose closure meets cell `index`.
    pub fn star(&self, index: usize) -> Result<Vec<usize>> {
        let c = self.cell(index)?;
        Ok((0..self.cells.len()).filter(|&j| c.meets_closure_of(&self.cells[j])).collect())
    }

    /// Sub-decomposition made of the given cells, with the carrier replaced
    /// by their union.
    pub fn select(&self, indices: &[usize]) -> Result<Decomposition> {
        let cells = indices.iter().map(|&i| self.cell(i).cloned()).collect::<Result<Vec<_>>>()?;
        let carrier = Carrier::Set(union_formula(&cells, self.n));
        Ok(Decomposition { n: self.n, carrier, special: self.special, cells })
    }

    /// Closed bounding box of the union of the cells.
    pub fn bounding_box(&self) -> Result<ClosedBox> {
        let mut acc: Option<ClosedBox> = None;
        for c in &self.cells {
            let b = bounding_box(c)?;
            acc = Some(match acc {
                None => b,
                Some(a) => a
                    .into_iter()
                    .zip(b)
                    .map(|((l1, h1), (l2, h2))| (min_scalar(l1, l2), max_scalar(h1, h2)))
                    .collect(),
            });
        }
        acc.ok_or(Error::EmptyCell)
    }

    pub fn is_bounded(&self) -> bool {
        self.cells.iter().all(LinearCell::is_bounded)
    }

    /// The cells contained in `y`; `y` must be a union of cells.
    pub fn restrict(&self, y: &Formula) -> Result<Decomposition> {
        self.check_shape()?;
        y.check_arity(self.n)?;
        let mut cells = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            match cell_vs_set(c, y, self.n)? {
                Some(true) => cells.push(c.clone()),
                Some(false) => {}
                None => return Err(Error::NotPartitioned(format!("cell {i} meets both the set and its complement"))),
            }
        }
        Ok(Decomposition { n: self.n, carrier: self.carrier.and(y.clone()), special: self.special, cells })
    }
}

/// `Some(true)` if the cell lies in the set, `Some(false)` if it misses it,
/// `None` if it meets both the set and its complement.
pub(crate) fn cell_vs_set(cell: &LinearCell, y: &Formula, n: usize) -> Result<Option<bool>> {
    let mut atoms = Vec::new();
    y.collect_atoms(&mut atoms);
    let mut signs = HashMap::new();
    let mut uniform = true;
    for f in atoms {
        match uniform_sign(&f, cell)? {
            Some(s) => {
                signs.insert(f, s);
            }
            None => uniform = false,
        }
    }
    if uniform {
        return Ok(Some(y.eval_with(&mut |f| signs[f])));
    }
    let sys = cell.system();
    let meets = y.dnf(n).iter().any(|t| feasible(&sys.and(t)));
    let escapes = Formula::not(y.clone()).dnf(n).iter().any(|t| feasible(&sys.and(t)));
    Ok(match (meets, escapes) {
        (true, false) => Some(true),
        (false, _) => Some(false),
        (true, true) => None,
    })
}

/// Formula for a union of cells.
pub fn union_formula(cells: &[LinearCell], n: usize) -> Formula {
    Formula::or(cells.iter().map(|c| cell_formula(c, n)).collect())
}

/// Formula for a single cell.
pub fn cell_formula(cell: &LinearCell, n: usize) -> Formula {
    use crate::oracle::Rel;
    let sys = cell.system();
    Formula::and(
        sys.constraints()
            .iter()
            .map(|c| {
                let f = c.f.lift(n);
                match c.rel {
                    Rel::Lt => Formula::gt(-&f),
                    Rel::Le => Formula::ge(-&f),
                    Rel::Eq => Formula::eq(f),
                }
            })
            .collect(),
    )
}

/// The distinct projections of the cells onto the first `n − 1`
/// coordinates, with each cell's projection index. Structurally different
/// descriptions of the same set are identified.
pub(crate) fn base_projections(cells: &[LinearCell]) -> (Vec<LinearCell>, Vec<usize>) {
    let mut bases: Vec<LinearCell> = Vec::new();
    let mut index = Vec::with_capacity(cells.len());
    for c in cells {
        let b = c.base().expect("dimension above one");
        let pos = bases.iter().position(|e| *e == b).or_else(|| bases.iter().position(|e| e.same_set(&b)));
        index.push(pos.unwrap_or_else(|| {
            bases.push(b);
            bases.len() - 1
        }));
    }
    (bases, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, point, AffineMap};

    fn line() -> Decomposition {
        decompose(&[Formula::ge(AffineMap::from_ints(&[1], 0))], 1).unwrap()
    }

    #[test]
    fn restrict_examples() {
        let d = line();
        assert_eq!(d.restrict(&Formula::True).unwrap().cells, d.cells);
        let y = Formula::ge(AffineMap::from_ints(&[1], 0));
        let r = d.restrict(&y).unwrap();
        assert_eq!(r.cells, vec![LinearCell::point(int(0)), LinearCell::interval(Some(int(0)), None).unwrap()]);
        assert_eq!(r.carrier, Carrier::Set(y));
        let only = cell_formula(&d.cells[1], 1);
        assert_eq!(d.restrict(&only).unwrap().cells, vec![LinearCell::point(int(0))]);
        let bad = Formula::ge(AffineMap::from_ints(&[1], -1));
        assert!(matches!(d.restrict(&bad), Err(Error::NotPartitioned(_))));
    }

    #[test]
    fn star_examples() {
        let d = line();
        assert_eq!(d.star(1).unwrap(), vec![0, 1, 2]);
        assert_eq!(d.star(0).unwrap(), vec![0]);
        assert!(matches!(d.star(3), Err(Error::OutOfRange { .. })));
        let iso = d.select(&[1]).unwrap();
        assert_eq!(iso.star(0).unwrap(), vec![0]);
    }

    #[test]
    fn find_and_box() {
        let d = line();
        assert_eq!(d.find_cell(&point(&[0])), Some(1));
        assert_eq!(d.find_cell(&point(&[-3])), Some(0));
        assert_eq!(d.bounding_box(), Err(Error::Unbounded));
        let b = d.select(&[1]).unwrap().bounding_box().unwrap();
        assert_eq!(b, vec![(int(0), int(0))]);
    }

    #[test]
    fn carrier_json() {
        let d = line();
        let js = serde_json::to_value(&d).unwrap();
        assert_eq!(js["carrier"], "all");
        assert_eq!(js["cells"].as_array().unwrap().len(), 3);
        let back: Decomposition = serde_json::from_value(js).unwrap();
        assert_eq!(back, d);
        let r = d.restrict(&Formula::ge(AffineMap::from_ints(&[1], 0))).unwrap();
        let back: Decomposition = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<Carrier>("\"most\"").is_err());
    }

    #[test]
    fn cell_formula_describes_cell() {
        let d = decompose(&[Formula::ge(AffineMap::from_ints(&[-1, 1], 0))], 2).unwrap();
        for c in &d.cells {
            let f = cell_formula(c, 2);
            for x in -2..=2 {
                for y in -2..=2 {
                    let p = point(&[x, y]);
                    assert_eq!(f.holds(&p), c.contains(&p).unwrap());
                }
            }
        }
    }
}
