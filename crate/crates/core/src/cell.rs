//! Linear cells, built one coordinate at a time.
//!
//! A cell of `Rⁿ` is stored as `n` stages. Stage `k` constrains coordinate
//! `k` in terms of the first `k` coordinates: either it is the graph of an
//! affine map, or it lies strictly between two extended affine maps. In `R`
//! the same two forms give points and open intervals.

use std::fmt;

use num_traits::Zero;
use rand::Rng;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::oracle::{
    self, bounding_box, compare_on_cell, feasible, system_subset, Constraint, LinearSystem,
};
use crate::scalar::{format_scalar, int, parse_scalar, AffineMap, ExtAffine, Order, Point, Scalar, WireScalar};

/// One step of the recursive construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    /// `x_k = f(x_1, …, x_{k-1})`.
    Graph(AffineMap),
    /// `lo(x_1, …) < x_k < hi(x_1, …)`.
    Band(ExtAffine, ExtAffine),
}

impl Stage {
    pub fn is_band(&self) -> bool {
        matches!(self, Stage::Band(..))
    }

    fn arity(&self) -> Option<usize> {
        match self {
            Stage::Graph(f) => Some(f.arity()),
            Stage::Band(lo, hi) => lo.finite().or(hi.finite()).map(AffineMap::arity),
        }
    }
}

/// A 0/1 vector such as a cell index, a face label `σ` or a corner label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(Vec<u8>);

pub type SigmaLabel = Label;
pub type CornerLabel = Label;

impl Label {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Parse(format!("label entries must be 0 or 1: {bits:?}")));
        }
        Ok(Self(bits))
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self::new(bits.to_vec()).expect("0/1 label")
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> u8 {
        self.0[k]
    }

    /// Component-wise `≤`.
    pub fn le(&self, other: &Label) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn prefix(&self, m: usize) -> Label {
        Label(self.0[..m].to_vec())
    }

    /// Every label component-wise below `self`, in lexicographic order.
    pub fn below(&self) -> Vec<Label> {
        let mut out = vec![Vec::new()];
        for &b in &self.0 {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..=b).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(Label).collect()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearCell {
    stages: Vec<Stage>,
}

impl LinearCell {
    pub fn point(c: Scalar) -> Self {
        Self { stages: vec![Stage::Graph(AffineMap::constant(0, c))] }
    }

    /// The open interval `(lo, hi)`; `None` stands for an infinite end.
    pub fn interval(lo: Option<Scalar>, hi: Option<Scalar>) -> Result<Self> {
        if let (Some(l), Some(h)) = (&lo, &hi) {
            if l >= h {
                return Err(Error::InvalidCell(format!("empty interval ({}, {})", format_scalar(l), format_scalar(h))));
            }
        }
        let lo = lo.map_or(ExtAffine::NegInf, |v| ExtAffine::Finite(AffineMap::constant(0, v)));
        let hi = hi.map_or(ExtAffine::PosInf, |v| ExtAffine::Finite(AffineMap::constant(0, v)));
        Ok(Self { stages: vec![Stage::Band(lo, hi)] })
    }

    pub fn graph(base: &LinearCell, f: AffineMap) -> Result<Self> {
        if f.arity() != base.dim() {
            return Err(Error::Arity { expected: base.dim(), got: f.arity() });
        }
        let mut stages = base.stages.clone();
        stages.push(Stage::Graph(f));
        Ok(Self { stages })
    }

    /// The band `(lo, hi)` over `base`; requires `lo < hi` on all of `base`.
    pub fn band(base: &LinearCell, lo: ExtAffine, hi: ExtAffine) -> Result<Self> {
        for m in [&lo, &hi].into_iter().filter_map(ExtAffine::finite) {
            if m.arity() != base.dim() {
                return Err(Error::Arity { expected: base.dim(), got: m.arity() });
            }
        }
        if compare_on_cell(&lo, &hi, base)? != Order::Less {
            return Err(Error::InvalidCell(format!("band bounds {lo} < {hi} fail on base")));
        }
        let mut stages = base.stages.clone();
        stages.push(Stage::Band(lo, hi));
        Ok(Self { stages })
    }

    /// All of `Rⁿ`, as a tower of unbounded bands.
    pub fn whole(n: usize) -> Self {
        Self { stages: (0..n).map(|_| Stage::Band(ExtAffine::NegInf, ExtAffine::PosInf)).collect() }
    }

    /// The open box `(a₁, b₁) × … × (aₙ, bₙ)`.
    pub fn open_box(bounds: &[(Scalar, Scalar)]) -> Result<Self> {
        let mut stages = Vec::with_capacity(bounds.len());
        for (k, (a, b)) in bounds.iter().enumerate() {
            if a >= b {
                return Err(Error::InvalidCell("degenerate box side".into()));
            }
            stages.push(Stage::Band(
                ExtAffine::Finite(AffineMap::constant(k, a.clone())),
                ExtAffine::Finite(AffineMap::constant(k, b.clone())),
            ));
        }
        Ok(Self { stages })
    }

    /// Validates each band stage against its base.
    pub fn from_stages(stages: Vec<Stage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidCell("cell needs at least one stage".into()));
        }
        let mut cell = Self { stages: Vec::with_capacity(stages.len()) };
        for (k, stage) in stages.into_iter().enumerate() {
            if let Some(a) = stage.arity() {
                if a != k {
                    return Err(Error::Arity { expected: k, got: a });
                }
            }
            cell = match (k, stage) {
                (0, Stage::Graph(f)) => LinearCell::point(f.constant_term().clone()),
                (0, Stage::Band(lo, hi)) => LinearCell::interval(
                    lo.finite().map(|f| f.constant_term().clone()),
                    hi.finite().map(|f| f.constant_term().clone()),
                )?,
                (_, Stage::Graph(f)) => LinearCell::graph(&cell, f)?,
                (_, Stage::Band(lo, hi)) => LinearCell::band(&cell, lo, hi)?,
            };
        }
        Ok(cell)
    }

    /// Skips validation; the caller guarantees `lo < hi` on every base.
    pub fn from_stages_unchecked(stages: Vec<Stage>) -> Self {
        debug_assert!(!stages.is_empty());
        Self { stages }
    }

    pub fn dim(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn stage(&self, k: usize) -> &Stage {
        &self.stages[k]
    }

    pub fn last(&self) -> &Stage {
        self.stages.last().expect("nonempty cell")
    }

    /// `(i₁, …, iₙ)` with `i_k = 0` exactly for graph stages.
    pub fn index(&self) -> Label {
        Label(self.stages.iter().map(|s| u8::from(s.is_band())).collect())
    }

    /// Topological dimension of the cell.
    pub fn cell_dim(&self) -> usize {
        self.stages.iter().filter(|s| s.is_band()).count()
    }

    /// The projection onto the first `m` coordinates.
    pub fn projection(&self, m: usize) -> Result<LinearCell> {
        if m == 0 || m > self.dim() {
            return Err(Error::OutOfRange { index: m, limit: self.dim() });
        }
        Ok(Self { stages: self.stages[..m].to_vec() })
    }

    /// The projection dropping the last coordinate, if any remain.
    pub fn base(&self) -> Option<LinearCell> {
        (self.dim() > 1).then(|| Self { stages: self.stages[..self.dim() - 1].to_vec() })
    }

    fn stage_constraints(&self, weak: bool) -> Vec<Constraint> {
        let n = self.dim();
        let mut out = Vec::new();
        for (k, stage) in self.stages.iter().enumerate() {
            let xk = AffineMap::coordinate(n, k);
            match stage {
                Stage::Graph(f) => out.push(Constraint::eq(&xk - &f.lift(n))),
                Stage::Band(lo, hi) => {
                    let mk = |f: AffineMap| if weak { Constraint::le(f) } else { Constraint::lt(f) };
                    if let Some(lo) = lo.finite() {
                        out.push(mk(&lo.lift(n) - &xk));
                    }
                    if let Some(hi) = hi.finite() {
                        out.push(mk(&xk - &hi.lift(n)));
                    }
                }
            }
        }
        out
    }

    pub fn system(&self) -> LinearSystem {
        LinearSystem::from_constraints(self.dim(), self.stage_constraints(false))
    }

    /// Weak version of [`Self::system`]; describes the closure of a
    /// (nonempty) cell.
    pub fn closure_system(&self) -> LinearSystem {
        LinearSystem::from_constraints(self.dim(), self.stage_constraints(true))
    }

    fn check_dim(&self, x: &[Scalar]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Arity { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn contains(&self, x: &[Scalar]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains_unchecked(x, false))
    }

    pub fn closure_contains(&self, x: &[Scalar]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains_unchecked(x, true))
    }

    fn contains_unchecked(&self, x: &[Scalar], weak: bool) -> bool {
        self.stages.iter().enumerate().all(|(k, stage)| {
            let v = &x[k];
            match stage {
                Stage::Graph(f) => f.eval_prefix(x) == *v,
                Stage::Band(lo, hi) => {
                    let lo_ok = lo.finite().is_none_or(|f| {
                        let l = f.eval_prefix(x);
                        if weak { l <= *v } else { l < *v }
                    });
                    let hi_ok = hi.finite().is_none_or(|f| {
                        let h = f.eval_prefix(x);
                        if weak { *v <= h } else { *v < h }
                    });
                    lo_ok && hi_ok
                }
            }
        })
    }

    pub fn is_empty(&self) -> bool {
        !feasible(&self.system())
    }

    pub fn is_bounded(&self) -> bool {
        let finite = self.stages.iter().all(|s| match s {
            Stage::Graph(_) => true,
            Stage::Band(lo, hi) => lo.is_finite() && hi.is_finite(),
        });
        finite && bounding_box(self).is_ok()
    }

    /// Bounded, with every stage the zero graph or a band `(0, g)`.
    pub fn is_canonical(&self) -> bool {
        let anchored = self.stages.iter().all(|s| match s {
            Stage::Graph(f) => f.is_zero(),
            Stage::Band(lo, hi) => lo.finite().is_some_and(AffineMap::is_zero) && hi.is_finite(),
        });
        anchored && self.is_bounded()
    }

    /// Upper map `g_k` of a band stage.
    pub fn upper(&self, k: usize) -> Option<&AffineMap> {
        match &self.stages[k] {
            Stage::Band(_, hi) => hi.finite(),
            Stage::Graph(_) => None,
        }
    }

    /// Set equality, decided exactly.
    pub fn same_set(&self, other: &LinearCell) -> bool {
        self.dim() == other.dim()
            && system_subset(&self.system(), &other.system())
            && system_subset(&other.system(), &self.system())
    }

    /// `self ⊆ other`, decided exactly.
    pub fn subset_of(&self, other: &LinearCell) -> bool {
        self.dim() == other.dim() && system_subset(&self.system(), &other.system())
    }

    /// `self ⊆ cl(other)`, decided exactly.
    pub fn subset_of_closure(&self, other: &LinearCell) -> bool {
        self.dim() == other.dim() && system_subset(&self.system(), &other.closure_system())
    }

    /// `self ∩ cl(other) ≠ ∅`.
    pub fn meets_closure_of(&self, other: &LinearCell) -> bool {
        self.dim() == other.dim() && feasible(&self.system().and(&other.closure_system()))
    }

    pub fn sample_points(&self, k: usize, rng: &mut impl Rng) -> Result<Vec<Point>> {
        oracle::sample_points_with(self, k, rng)
    }

    /// The σ-face of a canonical cell.
    pub fn sigma_face(&self, sigma: &SigmaLabel) -> Result<LinearCell> {
        if !self.is_canonical() {
            return Err(Error::NotCanonical);
        }
        let index = self.index();
        if !sigma.le(&index) {
            return Err(Error::LabelOutOfRange { label: sigma.to_string(), index: index.to_string() });
        }
        let stages = self
            .stages
            .iter()
            .enumerate()
            .map(|(k, s)| match s {
                Stage::Band(..) if sigma.get(k) == 0 => Stage::Graph(AffineMap::zero(k)),
                other => other.clone(),
            })
            .collect();
        let face = Self { stages };
        // A face of a nonempty canonical cell may still be empty when the
        // upper map vanishes on the face's base.
        if face.is_empty() {
            return Err(Error::EmptyCell);
        }
        Ok(face)
    }

    /// Whether `self` is a face of the canonical cell `d`.
    pub fn is_face_of(&self, d: &LinearCell) -> bool {
        if self.dim() != d.dim() || !self.is_canonical() || !d.is_canonical() {
            return false;
        }
        let sigma = self.index();
        if !sigma.le(&d.index()) {
            return false;
        }
        d.sigma_face(&sigma).is_ok_and(|face| face.same_set(self))
    }

    /// The half-cell `C'` of a canonical cell.
    pub fn half_cell(&self) -> Result<HalfCell> {
        if !self.is_canonical() {
            return Err(Error::NotCanonical);
        }
        let stages = self
            .stages
            .iter()
            .map(|s| match s {
                Stage::Graph(_) => HalfStage::Zero,
                Stage::Band(_, hi) => HalfStage::UpTo(hi.finite().expect("canonical band").half()),
            })
            .collect();
        Ok(HalfCell { stages })
    }

    /// The corner with the given label. Requires finite endpoints along the
    /// way.
    pub fn corner(&self, label: &CornerLabel) -> Result<Point> {
        let index = self.index();
        if !label.le(&index) {
            return Err(Error::LabelOutOfRange { label: label.to_string(), index: index.to_string() });
        }
        let mut c: Point = Vec::with_capacity(self.dim());
        for (k, s) in self.stages.iter().enumerate() {
            let f = match s {
                Stage::Graph(f) => f,
                Stage::Band(lo, hi) => {
                    let side = if label.get(k) == 0 { lo } else { hi };
                    side.finite().ok_or(Error::Unbounded)?
                }
            };
            let v = f.eval_prefix(&c);
            c.push(v);
        }
        Ok(c)
    }

    /// Every `(label, corner)` pair; coinciding corners are listed under
    /// each of their labels.
    pub fn corners(&self) -> Result<Vec<(CornerLabel, Point)>> {
        if !self.is_bounded() {
            return Err(Error::Unbounded);
        }
        self.index().below().into_iter().map(|l| self.corner(&l).map(|c| (l, c))).collect()
    }
}

impl fmt::Display for LinearCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.stages.iter().enumerate() {
            if k > 0 {
                f.write_str(" ; ")?;
            }
            match s {
                Stage::Graph(g) => write!(f, "x{} = {}", k + 1, g)?,
                Stage::Band(lo, hi) => write!(f, "{} < x{} < {}", lo, k + 1, hi)?,
            }
        }
        Ok(())
    }
}

/// A stage of a half-cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HalfStage {
    /// `x_k = 0`.
    Zero,
    /// `0 < x_k ≤ F(x_1, …)`.
    UpTo(AffineMap),
}

/// The half-cell of a canonical cell: like the cell, but with each band
/// `(0, g)` replaced by `(0, g/2]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfCell {
    stages: Vec<HalfStage>,
}

impl HalfCell {
    pub fn dim(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[HalfStage] {
        &self.stages
    }

    pub fn projection(&self, m: usize) -> HalfCell {
        HalfCell { stages: self.stages[..m].to_vec() }
    }

    pub fn contains(&self, x: &[Scalar]) -> bool {
        self.holds(x, false)
    }

    pub fn closure_contains(&self, x: &[Scalar]) -> bool {
        self.holds(x, true)
    }

    fn holds(&self, x: &[Scalar], closed: bool) -> bool {
        x.len() == self.dim()
            && self.stages.iter().enumerate().all(|(k, s)| match s {
                HalfStage::Zero => x[k].is_zero(),
                HalfStage::UpTo(f) => {
                    let lo_ok = if closed { x[k] >= Scalar::zero() } else { x[k] > Scalar::zero() };
                    lo_ok && x[k] <= f.eval_prefix(x)
                }
            })
    }

    pub fn closure_system(&self) -> LinearSystem {
        let n = self.dim();
        let mut sys = LinearSystem::new(n);
        for (k, s) in self.stages.iter().enumerate() {
            let xk = AffineMap::coordinate(n, k);
            match s {
                HalfStage::Zero => sys.push(Constraint::eq(xk)),
                HalfStage::UpTo(f) => {
                    sys.push(Constraint::le(-&xk));
                    sys.push(Constraint::le(&xk - &f.lift(n)));
                }
            }
        }
        sys
    }

    /// Random points; with `closed`, points of the closure.
    pub fn sample(&self, k: usize, rng: &mut impl Rng, closed: bool) -> Vec<Point> {
        (0..k)
            .map(|_| {
                let mut x: Point = Vec::with_capacity(self.dim());
                for s in &self.stages {
                    let v = match s {
                        HalfStage::Zero => Scalar::zero(),
                        HalfStage::UpTo(f) => {
                            let top = f.eval_prefix(&x);
                            let r = if closed {
                                oracle::closed_fraction(rng)
                            } else if rng.gen_range(0..6) == 0 {
                                int(1)
                            } else {
                                oracle::open_fraction(rng)
                            };
                            top * r
                        }
                    };
                    x.push(v);
                }
                x
            })
            .collect()
    }
}

// ---- JSON form ------------------------------------------------------------

/// An interval end: a scalar, or `"-inf"` / `"+inf"`.
struct WireEnd(Option<Scalar>);

impl Serialize for WireEnd {
    fn serialize<S: Serializer>(&self, _s: S) -> std::result::Result<S::Ok, S::Error> {
        unreachable!("interval ends are serialized through CellRepr")
    }
}

impl<'de> Deserialize<'de> for WireEnd {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = WireEnd;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational, \"-inf\" or \"+inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<WireEnd, E> {
                match v.trim() {
                    "-inf" | "+inf" | "inf" => Ok(WireEnd(None)),
                    s => parse_scalar(s).map(|q| WireEnd(Some(q))).map_err(E::custom),
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<WireEnd, E> {
                Ok(WireEnd(Some(int(v))))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<WireEnd, E> {
                Ok(WireEnd(Some(Scalar::from_integer(v.into()))))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CellRepr {
    Point {
        c: WireScalar,
    },
    Interval {
        #[serde(serialize_with = "ser_end_lo")]
        lo: WireEnd,
        #[serde(serialize_with = "ser_end_hi")]
        hi: WireEnd,
    },
    Graph {
        base: Box<CellRepr>,
        f: AffineMap,
    },
    Band {
        base: Box<CellRepr>,
        lo: ExtAffine,
        hi: ExtAffine,
    },
}

fn ser_end_lo<S: Serializer>(e: &WireEnd, s: S) -> std::result::Result<S::Ok, S::Error> {
    match &e.0 {
        Some(q) => s.serialize_str(&format_scalar(q)),
        None => s.serialize_str("-inf"),
    }
}

fn ser_end_hi<S: Serializer>(e: &WireEnd, s: S) -> std::result::Result<S::Ok, S::Error> {
    match &e.0 {
        Some(q) => s.serialize_str(&format_scalar(q)),
        None => s.serialize_str("+inf"),
    }
}

impl LinearCell {
    fn to_repr(&self) -> CellRepr {
        let mut repr: Option<CellRepr> = None;
        for s in &self.stages {
            repr = Some(match (repr, s) {
                (None, Stage::Graph(f)) => CellRepr::Point { c: WireScalar(f.constant_term().clone()) },
                (None, Stage::Band(lo, hi)) => CellRepr::Interval {
                    lo: WireEnd(lo.finite().map(|f| f.constant_term().clone())),
                    hi: WireEnd(hi.finite().map(|f| f.constant_term().clone())),
                },
                (Some(b), Stage::Graph(f)) => CellRepr::Graph { base: Box::new(b), f: f.clone() },
                (Some(b), Stage::Band(lo, hi)) => {
                    CellRepr::Band { base: Box::new(b), lo: lo.clone(), hi: hi.clone() }
                }
            });
        }
        repr.expect("nonempty cell")
    }

    fn stages_from_repr(repr: CellRepr, out: &mut Vec<Stage>) {
        match repr {
            CellRepr::Point { c } => out.push(Stage::Graph(AffineMap::constant(0, c.0))),
            CellRepr::Interval { lo, hi } => out.push(Stage::Band(
                lo.0.map_or(ExtAffine::NegInf, |v| ExtAffine::Finite(AffineMap::constant(0, v))),
                hi.0.map_or(ExtAffine::PosInf, |v| ExtAffine::Finite(AffineMap::constant(0, v))),
            )),
            CellRepr::Graph { base, f } => {
                Self::stages_from_repr(*base, out);
                out.push(Stage::Graph(f));
            }
            CellRepr::Band { base, lo, hi } => {
                Self::stages_from_repr(*base, out);
                out.push(Stage::Band(lo, hi));
            }
        }
    }
}

impl Serialize for LinearCell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_repr().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearCell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CellRepr::deserialize(d)?;
        let mut stages = Vec::new();
        Self::stages_from_repr(repr, &mut stages);
        LinearCell::from_stages(stages).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{point, ratio};

    fn unit() -> LinearCell {
        LinearCell::interval(Some(int(0)), Some(int(4))).unwrap()
    }

    /// `(0, x/2 + 2)` over `(0, 4)`.
    fn band() -> LinearCell {
        LinearCell::band(
            &unit(),
            AffineMap::zero(1).into(),
            AffineMap::new(vec![ratio(1, 2)], int(2)).into(),
        )
        .unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(unit().contains(&point(&[2])).unwrap());
        assert!(!band().contains(&point(&[2, 3])).unwrap());
        assert!(band().contains(&point(&[2, 2])).unwrap());
        let g = LinearCell::graph(&unit(), AffineMap::zero(1)).unwrap();
        assert!(g.contains(&point(&[2, 0])).unwrap());
        assert!(unit().contains(&point(&[1, 1])).is_err());
    }

    #[test]
    fn closure_examples() {
        assert!(unit().closure_contains(&point(&[0])).unwrap());
        assert!(band().closure_contains(&point(&[4, 4])).unwrap());
        assert!(!unit().closure_contains(&point(&[5])).unwrap());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(band().projection(1).unwrap(), unit());
        assert_eq!(band().projection(2).unwrap(), band());
        let inner = LinearCell::graph(&LinearCell::interval(Some(int(0)), Some(int(1))).unwrap(), AffineMap::zero(1)).unwrap();
        let outer = LinearCell::graph(&inner, AffineMap::from_ints(&[1, 1], 0)).unwrap();
        assert_eq!(outer.projection(2).unwrap(), inner);
        assert!(band().projection(3).is_err());
        assert!(band().projection(0).is_err());
    }

    #[test]
    fn boundedness_and_canonicity() {
        assert!(!LinearCell::interval(Some(int(0)), None).unwrap().is_bounded());
        assert!(band().is_bounded());
        assert!(LinearCell::point(int(0)).is_bounded());
        assert!(band().is_canonical());
        assert!(!LinearCell::interval(Some(int(1)), Some(int(4))).unwrap().is_canonical());
        assert!(LinearCell::graph(&unit(), AffineMap::zero(1)).unwrap().is_canonical());
    }

    #[test]
    fn band_requires_ordered_bounds() {
        let bad = LinearCell::band(&unit(), AffineMap::from_ints(&[1], 0).into(), AffineMap::constant(1, int(2)).into());
        assert!(matches!(bad, Err(Error::InvalidCell(_))));
    }

    #[test]
    fn face_examples() {
        let d = band();
        let origin = d.sigma_face(&Label::from_bits(&[0, 0])).unwrap();
        assert_eq!(origin.index(), Label::from_bits(&[0, 0]));
        assert!(origin.contains(&point(&[0, 0])).unwrap());
        assert_eq!(d.sigma_face(&d.index()).unwrap(), d);
        let side = d.sigma_face(&Label::from_bits(&[0, 1])).unwrap();
        assert!(side.contains(&point(&[0, 1])).unwrap());
        assert!(!side.contains(&point(&[0, 2])).unwrap());
        assert!(side.closure_contains(&point(&[0, 2])).unwrap());
        assert!(side.is_face_of(&d));
        assert!(d.is_face_of(&d));
        assert!(!LinearCell::point(int(1)).is_face_of(&unit()));
        let unit_faces: Vec<_> = unit().index().below().iter().map(|s| unit().sigma_face(s).unwrap()).collect();
        assert_eq!(unit_faces, vec![LinearCell::point(int(0)), unit()]);
    }

    #[test]
    fn half_cell_examples() {
        let h = unit().half_cell().unwrap();
        assert!(h.contains(&point(&[2])));
        assert!(!h.contains(&point(&[0])));
        assert!(!h.contains(&point(&[3])));
        assert_eq!(LinearCell::point(int(0)).half_cell().unwrap().stages(), &[HalfStage::Zero]);
        let hb = band().half_cell().unwrap();
        assert_eq!(hb.stages()[1], HalfStage::UpTo(AffineMap::new(vec![ratio(1, 4)], int(1))));
        assert_eq!(hb.projection(1), h);
        assert!(hb.contains(&[int(2), ratio(3, 2)]));
        assert!(!hb.contains(&[int(2), ratio(8, 5)]));
        assert!(matches!(LinearCell::interval(Some(int(1)), Some(int(2))).unwrap().half_cell(), Err(Error::NotCanonical)));
    }

    #[test]
    fn corner_examples() {
        let c = unit().corners().unwrap();
        assert_eq!(c, vec![(Label::from_bits(&[0]), point(&[0])), (Label::from_bits(&[1]), point(&[4]))]);
        let c = band().corners().unwrap();
        let pts: Vec<Point> = c.into_iter().map(|(_, p)| p).collect();
        assert_eq!(pts, vec![point(&[0, 0]), point(&[0, 2]), point(&[4, 0]), point(&[4, 4])]);
        assert_eq!(LinearCell::point(int(3)).corners().unwrap(), vec![(Label::from_bits(&[0]), point(&[3]))]);
        assert_eq!(LinearCell::interval(None, Some(int(0))).unwrap().corners(), Err(Error::Unbounded));
    }

    #[test]
    fn json_nested_form() {
        let js = serde_json::to_value(band()).unwrap();
        assert_eq!(js["kind"], "band");
        assert_eq!(js["base"]["kind"], "interval");
        assert_eq!(js["base"]["lo"], "0");
        let back: LinearCell = serde_json::from_value(js).unwrap();
        assert_eq!(back, band());
        let ray: LinearCell = serde_json::from_str(r#"{"kind":"interval","lo":"-inf","hi":"1/2"}"#).unwrap();
        assert_eq!(ray, LinearCell::interval(None, Some(ratio(1, 2))).unwrap());
        assert_eq!(serde_json::to_value(&ray).unwrap()["lo"], "-inf");
        let bad = serde_json::from_str::<LinearCell>(r#"{"kind":"interval","lo":"2","hi":"1"}"#);
        assert!(bad.is_err());
    }
}
