//! Exact decision procedures over systems of affine constraints.
//!
//! Feasibility is decided by Fourier–Motzkin elimination over exact
//! rationals. Strictness is carried symbolically: a combined constraint is
//! strict when either parent is. Equalities are used for substitution before
//! any pairing happens, which keeps the systems produced by graph cells small.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cell::{LinearCell, Stage};
use crate::error::{Error, Result};
use crate::scalar::{int, AffineMap, ExtAffine, Order, Point, Scalar};

/// Relation of a constraint `f(x) rel 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

/// The constraint `f(x) rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub f: AffineMap,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(f: AffineMap, rel: Rel) -> Self {
        Self { f, rel }
    }

    pub fn lt(f: AffineMap) -> Self {
        Self::new(f, Rel::Lt)
    }

    pub fn le(f: AffineMap) -> Self {
        Self::new(f, Rel::Le)
    }

    pub fn eq(f: AffineMap) -> Self {
        Self::new(f, Rel::Eq)
    }

    pub fn arity(&self) -> usize {
        self.f.arity()
    }

    pub fn holds(&self, x: &[Scalar]) -> bool {
        let v = self.f.eval_prefix(x);
        holds_value(&v, self.rel)
    }

    /// The closure of the constraint's solution set.
    pub fn weak(&self) -> Self {
        match self.rel {
            Rel::Lt => Self::le(self.f.clone()),
            _ => self.clone(),
        }
    }

    /// The complement, as a disjunction of constraints.
    pub fn negation(&self) -> Vec<Constraint> {
        match self.rel {
            Rel::Lt => vec![Self::le(-&self.f)],
            Rel::Le => vec![Self::lt(-&self.f)],
            Rel::Eq => vec![Self::lt(self.f.clone()), Self::lt(-&self.f)],
        }
    }

    pub fn lift(&self, arity: usize) -> Self {
        Self::new(self.f.lift(arity), self.rel)
    }
}

fn holds_value(v: &Scalar, rel: Rel) -> bool {
    match rel {
        Rel::Lt => v.is_negative(),
        Rel::Le => !v.is_positive(),
        Rel::Eq => v.is_zero(),
    }
}

/// A conjunction of affine constraints in a fixed number of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    arity: usize,
    constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(arity: usize) -> Self {
        Self { arity, constraints: Vec::new() }
    }

    pub fn from_constraints(arity: usize, constraints: Vec<Constraint>) -> Self {
        let mut s = Self::new(arity);
        for c in constraints {
            s.push(c);
        }
        s
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Panics on arity mismatch: systems are only assembled internally.
    pub fn push(&mut self, c: Constraint) {
        assert_eq!(c.arity(), self.arity, "constraint arity mismatch");
        self.constraints.push(c);
    }

    pub fn with(mut self, c: Constraint) -> Self {
        self.push(c);
        self
    }

    pub fn extend(&mut self, other: &LinearSystem) {
        for c in &other.constraints {
            self.push(c.clone());
        }
    }

    pub fn and(&self, other: &LinearSystem) -> Self {
        let mut s = self.clone();
        s.extend(other);
        s
    }

    pub fn holds(&self, x: &[Scalar]) -> bool {
        x.len() == self.arity && self.constraints.iter().all(|c| c.holds(x))
    }

    /// The system with every strict inequality relaxed.
    pub fn weak(&self) -> Self {
        Self { arity: self.arity, constraints: self.constraints.iter().map(Constraint::weak).collect() }
    }
}

struct Contradiction;

/// Normalizes a constraint so that its first nonzero coefficient has
/// absolute value one (or is exactly one, for equalities). Constant
/// constraints are resolved immediately.
fn normalize(c: Constraint) -> std::result::Result<Option<Constraint>, Contradiction> {
    let Some(lead) = c.f.coeffs().iter().find(|v| !v.is_zero()).cloned() else {
        return if holds_value(c.f.constant_term(), c.rel) { Ok(None) } else { Err(Contradiction) };
    };
    let k = match c.rel {
        Rel::Eq => lead.recip(),
        _ => lead.abs().recip(),
    };
    if k.is_one() {
        return Ok(Some(c));
    }
    Ok(Some(Constraint::new(c.f.scale(&k), c.rel)))
}

/// Normalizes, resolves constants and keeps only the tightest inequality
/// among those sharing a coefficient vector.
fn prune(cons: Vec<Constraint>) -> std::result::Result<Vec<Constraint>, Contradiction> {
    let mut ineqs: BTreeMap<Vec<Scalar>, (Scalar, Rel)> = BTreeMap::new();
    let mut eqs: BTreeMap<Vec<Scalar>, Scalar> = BTreeMap::new();
    for c in cons {
        let Some(c) = normalize(c)? else { continue };
        let key = c.f.coeffs().to_vec();
        let cst = c.f.constant_term().clone();
        match c.rel {
            Rel::Eq => match eqs.get(&key) {
                Some(prev) if *prev != cst => return Err(Contradiction),
                Some(_) => {}
                None => {
                    eqs.insert(key, cst);
                }
            },
            rel => {
                // a·x + c rel 0: larger c is tighter, strict beats weak.
                let replace = match ineqs.get(&key) {
                    None => true,
                    Some((pc, prel)) => cst > *pc || (cst == *pc && rel == Rel::Lt && *prel == Rel::Le),
                };
                if replace {
                    ineqs.insert(key, (cst, rel));
                }
            }
        }
    }
    let mut out: Vec<Constraint> = Vec::with_capacity(eqs.len() + ineqs.len());
    for (k, c) in eqs {
        out.push(Constraint::eq(AffineMap::new(k, c)));
    }
    for (k, (c, rel)) in ineqs {
        out.push(Constraint::new(AffineMap::new(k, c), rel));
    }
    Ok(out)
}

/// Projects out variable `var`.
fn eliminate(cons: Vec<Constraint>, var: usize) -> std::result::Result<Vec<Constraint>, Contradiction> {
    if let Some(pos) = cons.iter().position(|c| c.rel == Rel::Eq && !c.f.coeff(var).is_zero()) {
        let e = &cons[pos];
        let a = e.f.coeff(var).clone();
        let mut out = Vec::with_capacity(cons.len() - 1);
        for (i, c) in cons.iter().enumerate() {
            if i == pos {
                continue;
            }
            let b = c.f.coeff(var);
            if b.is_zero() {
                out.push(c.clone());
            } else {
                let f = &c.f - &e.f.scale(&(b / &a));
                out.push(Constraint::new(f.with_coeff(var, Scalar::zero()), c.rel));
            }
        }
        return prune(out);
    }

    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut out = Vec::new();
    for c in cons {
        let a = c.f.coeff(var);
        if a.is_positive() {
            upper.push(c);
        } else if a.is_negative() {
            lower.push(c);
        } else {
            out.push(c);
        }
    }
    for u in &upper {
        let a = u.f.coeff(var);
        for l in &lower {
            let b = -l.f.coeff(var);
            let f = &u.f.scale(&b) + &l.f.scale(a);
            let rel = if u.rel == Rel::Lt || l.rel == Rel::Lt { Rel::Lt } else { Rel::Le };
            out.push(Constraint::new(f.with_coeff(var, Scalar::zero()), rel));
        }
    }
    prune(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub value: Scalar,
    pub strict: bool,
}

/// The set of values a single variable can take: an interval with optional
/// endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<Bound>,
    pub hi: Option<Bound>,
}

impl Interval {
    pub fn contains(&self, v: &Scalar) -> bool {
        let lo_ok = self.lo.as_ref().is_none_or(|b| if b.strict { v > &b.value } else { v >= &b.value });
        let hi_ok = self.hi.as_ref().is_none_or(|b| if b.strict { v < &b.value } else { v <= &b.value });
        lo_ok && hi_ok
    }

    fn is_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(l), Some(h)) => l.value > h.value || (l.value == h.value && (l.strict || h.strict)),
            _ => false,
        }
    }

    /// A point of the interval with small height when possible.
    fn pick(&self) -> Option<Scalar> {
        if self.is_empty() {
            return None;
        }
        Some(match (&self.lo, &self.hi) {
            (None, None) => Scalar::zero(),
            (Some(l), None) => l.value.floor() + Scalar::one(),
            (None, Some(h)) => h.value.ceil() - Scalar::one(),
            (Some(l), Some(h)) if l.value == h.value => l.value.clone(),
            (Some(l), Some(h)) => {
                let c = l.value.floor() + Scalar::one();
                if c < h.value {
                    c
                } else {
                    (&l.value + &h.value) / int(2)
                }
            }
        })
    }
}

/// A value strictly between two optional ends, of small height when
/// possible. Panics if `lo ≥ hi`.
pub fn pick_between(lo: Option<&Scalar>, hi: Option<&Scalar>) -> Scalar {
    let end = |v: &Scalar| Bound { value: v.clone(), strict: true };
    Interval { lo: lo.map(end), hi: hi.map(end) }.pick().expect("nonempty open interval")
}

/// Bounds on variable `var` given by constraints in which every other
/// variable has been fixed by `prefix` or has a zero coefficient.
fn bounds_on(cons: &[Constraint], prefix: &[Scalar], var: usize) -> Option<Interval> {
    let mut iv = Interval { lo: None, hi: None };
    let mut fixed: Option<Scalar> = None;
    for c in cons {
        let a = c.f.coeff(var);
        let mut rest = c.f.constant_term().clone();
        for (i, v) in prefix.iter().enumerate() {
            let ci = c.f.coeff(i);
            if !ci.is_zero() {
                rest += ci * v;
            }
        }
        if a.is_zero() {
            if !holds_value(&rest, c.rel) {
                return None;
            }
            continue;
        }
        let root = -rest / a;
        match c.rel {
            Rel::Eq => match &fixed {
                Some(v) if *v != root => return None,
                _ => fixed = Some(root),
            },
            rel => {
                let strict = rel == Rel::Lt;
                let b = Bound { value: root, strict };
                if a.is_positive() {
                    if iv.hi.as_ref().is_none_or(|h| b.value < h.value || (b.value == h.value && strict)) {
                        iv.hi = Some(b);
                    }
                } else if iv.lo.as_ref().is_none_or(|l| b.value > l.value || (b.value == l.value && strict)) {
                    iv.lo = Some(b);
                }
            }
        }
    }
    if let Some(v) = fixed {
        if !iv.contains(&v) {
            return None;
        }
        let b = Bound { value: v, strict: false };
        return Some(Interval { lo: Some(b.clone()), hi: Some(b) });
    }
    if iv.is_empty() {
        None
    } else {
        Some(iv)
    }
}

/// Decides feasibility; on success returns a witness satisfying every
/// constraint exactly.
pub fn is_feasible(sys: &LinearSystem) -> Option<Point> {
    let n = sys.arity();
    let mut cur = prune(sys.constraints().to_vec()).ok()?;
    let mut levels = Vec::with_capacity(n);
    for var in (0..n).rev() {
        let next = eliminate(cur.clone(), var).ok()?;
        levels.push(cur);
        cur = next;
    }
    levels.reverse();
    let mut x: Point = Vec::with_capacity(n);
    for (k, level) in levels.iter().enumerate() {
        let v = bounds_on(level, &x, k)?.pick()?;
        x.push(v);
    }
    debug_assert!(sys.holds(&x), "elimination witness violates the system");
    Some(x)
}

pub fn feasible(sys: &LinearSystem) -> bool {
    is_feasible(sys).is_some()
}

/// The exact range of `f` over the solution set of `sys`, or `None` when the
/// system is infeasible.
pub fn range_over(f: &AffineMap, sys: &LinearSystem) -> Option<Interval> {
    let n = sys.arity();
    assert_eq!(f.arity(), n, "objective arity mismatch");
    // Variable 0 is the value t; the original variables move up by one.
    let shift = |g: &AffineMap| {
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(Scalar::zero());
        coeffs.extend(g.coeffs().iter().cloned());
        AffineMap::new(coeffs, g.constant_term().clone())
    };
    let mut cons: Vec<Constraint> = sys.constraints().iter().map(|c| Constraint::new(shift(&c.f), c.rel)).collect();
    let mut value = -&shift(f);
    value = value.with_coeff(0, Scalar::one());
    cons.push(Constraint::eq(value));
    let mut cur = prune(cons).ok()?;
    for var in (1..=n).rev() {
        cur = eliminate(cur, var).ok()?;
    }
    bounds_on(&cur, &[], 0)
}

/// Exact maximum of `f` over a system whose solution set is closed and
/// bounded in the direction of `f`.
pub fn sup_over_system(f: &AffineMap, sys: &LinearSystem) -> Result<Scalar> {
    let r = range_over(f, sys).ok_or(Error::EmptyCell)?;
    r.hi.map(|b| b.value).ok_or(Error::Unbounded)
}

pub fn inf_over_system(f: &AffineMap, sys: &LinearSystem) -> Result<Scalar> {
    let r = range_over(f, sys).ok_or(Error::EmptyCell)?;
    r.lo.map(|b| b.value).ok_or(Error::Unbounded)
}

/// Maximum of `f` on the closure of a bounded cell.
pub fn sup_over_closure(f: &AffineMap, cell: &LinearCell) -> Result<Scalar> {
    if !cell.is_bounded() {
        return Err(Error::Unbounded);
    }
    sup_over_system(f, &cell.closure_system())
}

pub fn inf_over_closure(f: &AffineMap, cell: &LinearCell) -> Result<Scalar> {
    if !cell.is_bounded() {
        return Err(Error::Unbounded);
    }
    inf_over_system(f, &cell.closure_system())
}

/// A closed box `[lo₁, hi₁] × … × [loₙ, hiₙ]`.
pub type ClosedBox = Vec<(Scalar, Scalar)>;

/// Coordinate-wise exact infimum and supremum of a system's solution set.
pub fn bounding_box_of_system(sys: &LinearSystem) -> Result<ClosedBox> {
    let n = sys.arity();
    (0..n)
        .map(|i| {
            let r = range_over(&AffineMap::coordinate(n, i), sys).ok_or(Error::EmptyCell)?;
            match (r.lo, r.hi) {
                (Some(l), Some(h)) => Ok((l.value, h.value)),
                _ => Err(Error::Unbounded),
            }
        })
        .collect()
}

pub fn bounding_box(cell: &LinearCell) -> Result<ClosedBox> {
    bounding_box_of_system(&cell.system())
}

/// Uniform comparison of `f` and `g` over a nonempty cell.
pub fn compare_on_cell(f: &ExtAffine, g: &ExtAffine, cell: &LinearCell) -> Result<Order> {
    let sys = cell.system();
    if !feasible(&sys) {
        return Err(Error::EmptyCell);
    }
    use ExtAffine::*;
    let (f, g) = match (f, g) {
        (NegInf, NegInf) | (PosInf, PosInf) => return Ok(Order::Equal),
        (NegInf, _) | (_, PosInf) => return Ok(Order::Less),
        (PosInf, _) | (_, NegInf) => return Ok(Order::Greater),
        (Finite(f), Finite(g)) => (f, g),
    };
    let n = cell.dim();
    if f.arity() != n || g.arity() != n {
        return Err(Error::Arity { expected: n, got: if f.arity() != n { f.arity() } else { g.arity() } });
    }
    let d = f - g;
    let above = feasible(&sys.clone().with(Constraint::lt(-&d)));
    let below = feasible(&sys.with(Constraint::lt(d)));
    Ok(match (below, above) {
        (true, true) => Order::Incomparable,
        (true, false) => Order::Less,
        (false, true) => Order::Greater,
        (false, false) => Order::Equal,
    })
}

/// Sign of `f` if it is uniform over the cell.
pub fn uniform_sign(f: &AffineMap, cell: &LinearCell) -> Result<Option<std::cmp::Ordering>> {
    let zero = ExtAffine::Finite(AffineMap::zero(f.arity()));
    Ok(match compare_on_cell(&ExtAffine::Finite(f.clone()), &zero, cell)? {
        Order::Less => Some(std::cmp::Ordering::Less),
        Order::Equal => Some(std::cmp::Ordering::Equal),
        Order::Greater => Some(std::cmp::Ordering::Greater),
        Order::Incomparable => None,
    })
}

/// `a ⊆ b` for solution sets, decided exactly.
pub fn system_subset(a: &LinearSystem, b: &LinearSystem) -> bool {
    b.constraints().iter().all(|c| c.negation().into_iter().all(|nc| !feasible(&a.clone().with(nc))))
}

/// A random fraction in `(0, 1)` with a small denominator.
pub(crate) fn open_fraction(rng: &mut impl Rng) -> Scalar {
    let den: i64 = rng.gen_range(2..=9);
    let num: i64 = rng.gen_range(1..den);
    crate::scalar::ratio(num, den)
}

/// A random fraction in `[0, 1]`, hitting the endpoints now and then.
pub(crate) fn closed_fraction(rng: &mut impl Rng) -> Scalar {
    match rng.gen_range(0..8) {
        0 => Scalar::zero(),
        1 => Scalar::one(),
        _ => open_fraction(rng),
    }
}

fn between(lo: Option<Scalar>, hi: Option<Scalar>, r: Scalar, rng: &mut impl Rng) -> Scalar {
    match (lo, hi) {
        (Some(l), Some(h)) => &l + (h - &l) * r,
        (Some(l), None) => l + int(rng.gen_range(0..4)) + r,
        (None, Some(h)) => h - int(rng.gen_range(0..4)) - r,
        (None, None) => int(rng.gen_range(-4..4)) + r,
    }
}

fn sample_one(cell: &LinearCell, rng: &mut impl Rng, closed: bool) -> Point {
    let mut x: Point = Vec::with_capacity(cell.dim());
    for stage in cell.stages() {
        let v = match stage {
            Stage::Graph(f) => f.eval_prefix(&x),
            Stage::Band(lo, hi) => {
                let lo = lo.finite().map(|f| f.eval_prefix(&x));
                let hi = hi.finite().map(|f| f.eval_prefix(&x));
                let r = if closed { closed_fraction(rng) } else { open_fraction(rng) };
                between(lo, hi, r, rng)
            }
        };
        x.push(v);
    }
    x
}

/// `k` exact points of the cell, deterministic in `seed`.
pub fn sample_points(cell: &LinearCell, k: usize, seed: u64) -> Result<Vec<Point>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_points_with(cell, k, &mut rng)
}

pub fn sample_points_with(cell: &LinearCell, k: usize, rng: &mut impl Rng) -> Result<Vec<Point>> {
    if !feasible(&cell.system()) {
        return Err(Error::EmptyCell);
    }
    Ok((0..k).map(|_| sample_one(cell, rng, false)).collect())
}

/// Points of the closure of the cell, including boundary points.
pub fn sample_closure_points_with(cell: &LinearCell, k: usize, rng: &mut impl Rng) -> Result<Vec<Point>> {
    if !feasible(&cell.system()) {
        return Err(Error::EmptyCell);
    }
    Ok((0..k).map(|_| sample_one(cell, rng, true)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{point, ratio};

    fn x_lt(c: i64) -> Constraint {
        // x - c < 0
        Constraint::lt(AffineMap::from_ints(&[1], -c))
    }

    fn x_gt(c: i64) -> Constraint {
        Constraint::lt(AffineMap::from_ints(&[-1], c))
    }

    #[test]
    fn contradictory_strict_bounds() {
        let sys = LinearSystem::from_constraints(1, vec![x_gt(0), x_lt(0)]);
        assert!(is_feasible(&sys).is_none());
    }

    #[test]
    fn empty_system_is_feasible() {
        assert_eq!(is_feasible(&LinearSystem::new(1)), Some(point(&[0])));
        assert_eq!(is_feasible(&LinearSystem::new(0)), Some(vec![]));
    }

    #[test]
    fn band_system_witness() {
        // x > 0, x < 4, y > 0, y < x/2 + 2
        let sys = LinearSystem::from_constraints(
            2,
            vec![
                Constraint::lt(AffineMap::from_ints(&[-1, 0], 0)),
                Constraint::lt(AffineMap::from_ints(&[1, 0], -4)),
                Constraint::lt(AffineMap::from_ints(&[0, -1], 0)),
                Constraint::lt(AffineMap::new(vec![ratio(-1, 2), int(1)], int(-2))),
            ],
        );
        let w = is_feasible(&sys).unwrap();
        assert!(sys.holds(&w));
    }

    #[test]
    fn weak_touching_bounds() {
        let sys = LinearSystem::from_constraints(
            1,
            vec![Constraint::le(AffineMap::from_ints(&[1], -3)), Constraint::le(AffineMap::from_ints(&[-1], 3))],
        );
        assert_eq!(is_feasible(&sys), Some(point(&[3])));
        let strict = sys.clone().with(x_lt(3));
        assert!(is_feasible(&strict).is_none());
    }

    #[test]
    fn equalities_substitute() {
        // y = 2x + 1, y < 0, x > -1  =>  feasible, x in (-1, -1/2)
        let sys = LinearSystem::from_constraints(
            2,
            vec![
                Constraint::eq(AffineMap::from_ints(&[2, -1], 1)),
                Constraint::lt(AffineMap::from_ints(&[0, 1], 0)),
                Constraint::lt(AffineMap::from_ints(&[-1, 0], -1)),
            ],
        );
        let w = is_feasible(&sys).unwrap();
        assert!(sys.holds(&w));
        let tight = sys.with(Constraint::lt(AffineMap::from_ints(&[1, 0], 1)));
        assert!(is_feasible(&tight.with(Constraint::le(AffineMap::from_ints(&[-1, 0], -2)))).is_none());
    }

    #[test]
    fn range_reads_value_interval() {
        // x in [0, 4], f = x/2 + 2 ranges over [2, 4]
        let sys = LinearSystem::from_constraints(
            1,
            vec![Constraint::le(AffineMap::from_ints(&[-1], 0)), Constraint::le(AffineMap::from_ints(&[1], -4))],
        );
        let f = AffineMap::new(vec![ratio(1, 2)], int(2));
        assert_eq!(sup_over_system(&f, &sys).unwrap(), int(4));
        assert_eq!(inf_over_system(&f, &sys).unwrap(), int(2));
        let open = LinearSystem::from_constraints(1, vec![x_gt(0)]);
        assert_eq!(sup_over_system(&f, &open), Err(Error::Unbounded));
    }
}
