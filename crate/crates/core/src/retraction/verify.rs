//! Exact pointwise checks of the retraction axioms on sampled `(t, x)`.

use std::fmt;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cell::LinearCell;
use crate::oracle::{closed_fraction, sample_points_with};
use crate::scalar::{int, Point, Scalar};

use super::homotopy::LoopHomotopy;
use super::star::GluedRetraction;
use super::pl::{breakpoints, eval_trajectory, first_fixed_time};
use super::Deformation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FailureKind {
    /// Evaluation failed on a valid argument.
    Eval,
    /// `H(t, x)` left the domain.
    Codomain,
    /// `H(0, x)` missed the target.
    Target,
    /// A target point moved.
    Fixed,
    /// `H(q, x) ≠ x`.
    Identity,
    /// `H(t, x) ≠ x` for some `t` past the fixing point.
    Niceness,
    /// `H(α − ε, x) = x`: the fixing point is not the least.
    Minimality,
    /// Closed-form fixing point differs from the trajectory scan.
    FixingPoint,
    /// `eval` differs from the independent trajectory.
    Trajectory,
    /// The larger retraction does not extend the smaller one.
    Extension,
    /// A trajectory left the union of the given cells.
    Interior,
    /// `F(0, ·)` is not constant.
    HomotopyStart,
    /// `F(q, ·) ≠ γ`.
    HomotopyEnd,
    /// `F(t, 0) ≠ F(t, p)`.
    LoopEnds,
    /// `F(t, s)` left the clipped carrier.
    Image,
}

/// A failed check with its witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub kind: FailureKind,
    pub t: Option<Scalar>,
    pub x: Point,
    pub value: Option<Point>,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pt = |p: &[Scalar]| p.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        write!(f, "{:?} at x = ({})", self.kind, pt(&self.x))?;
        if let Some(t) = &self.t {
            write!(f, ", t = {t}")?;
        }
        if let Some(v) = &self.value {
            write!(f, ", value = ({})", pt(v))?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RetractionReport {
    pub samples: usize,
    pub checks: usize,
    pub failures: Vec<Failure>,
}

impl RetractionReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, failure: impl FnOnce() -> Failure) {
        self.checks += 1;
        if !ok {
            self.failures.push(failure());
        }
    }

    pub fn merge(&mut self, other: RetractionReport) {
        self.samples += other.samples;
        self.checks += other.checks;
        self.failures.extend(other.failures);
    }
}

fn failure(kind: FailureKind, t: Option<&Scalar>, x: &[Scalar], value: Option<Point>, detail: impl Into<String>) -> Failure {
    Failure { kind, t: t.cloned(), x: x.to_vec(), value, detail: detail.into() }
}

/// Times to probe at `x`: the ends, a few random times and, when known, the
/// fixing point and times after it.
fn probe_times(q: &Scalar, alpha: Option<&Scalar>, rng: &mut ChaCha8Rng) -> Vec<Scalar> {
    let mut ts = vec![Scalar::zero(), q.clone()];
    for _ in 0..3 {
        ts.push(q * closed_fraction(rng));
    }
    if let Some(a) = alpha.filter(|a| *a >= &Scalar::zero() && *a <= q) {
        ts.push(a.clone());
        ts.push(a + (q - a) * closed_fraction(rng));
    }
    ts.sort();
    ts.dedup();
    ts
}

/// Checks `h` at `samples` points of its domain and a quarter as many points
/// of its target: codomain membership, the three axioms, niceness with
/// minimality, the closed-form fixing point against the trajectory scan, and
/// `eval` against the trajectory.
pub fn verify_retraction(h: &impl Deformation, samples: usize, seed: u64) -> RetractionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RetractionReport::default();
    let q = h.q().clone();
    let xs = h.sample_domain(samples, &mut rng);
    for x in &xs {
        report.samples += 1;
        check_point(h, x, &q, &mut rng, &mut report);
    }
    for x in h.sample_target(samples / 4 + 1, &mut rng) {
        report.samples += 1;
        for t in probe_times(&q, None, &mut rng) {
            match h.eval(&t, &x) {
                Ok(v) => report.check(v == x, || failure(FailureKind::Fixed, Some(&t), &x, Some(v.clone()), "target point moved")),
                Err(e) => report.check(false, || failure(FailureKind::Eval, Some(&t), &x, None, e.to_string())),
            }
        }
    }
    report
}

fn check_point(h: &impl Deformation, x: &Point, q: &Scalar, rng: &mut ChaCha8Rng, report: &mut RetractionReport) {
    let alpha = h.fixing_point(x);
    let tr = h.trajectory(x);
    for t in probe_times(q, alpha.as_ref(), rng) {
        let v = match h.eval(&t, x) {
            Ok(v) => v,
            Err(e) => {
                report.check(false, || failure(FailureKind::Eval, Some(&t), x, None, e.to_string()));
                continue;
            }
        };
        report.check(h.in_domain(&v), || failure(FailureKind::Codomain, Some(&t), x, Some(v.clone()), "left the domain"));
        if t.is_zero() {
            report.check(h.in_target(&v), || failure(FailureKind::Target, Some(&t), x, Some(v.clone()), "H(0, x) not in the target"));
        }
        if &t == q {
            report.check(&v == x, || failure(FailureKind::Identity, Some(&t), x, Some(v.clone()), "H(q, x) differs from x"));
        }
        if let Some(a) = &alpha {
            if &t >= a {
                report.check(&v == x, || failure(FailureKind::Niceness, Some(&t), x, Some(v.clone()), format!("moved after the fixing point {a}")));
            }
        }
        if let Some(tr) = tr.as_ref().filter(|tr| !tr.is_empty() && &t <= tr[0].hi()) {
            let w = eval_trajectory(tr, &t);
            report.check(w == v, || failure(FailureKind::Trajectory, Some(&t), x, Some(v.clone()), format!("trajectory gives {w:?}")));
        }
    }
    let Some(a) = alpha else { return };
    report.check(a >= Scalar::zero() && &a <= q, || failure(FailureKind::Niceness, Some(&a), x, None, "fixing point outside [0, q]"));
    if let Some(tr) = &tr {
        let scanned = first_fixed_time(tr, x);
        report.check(scanned.as_ref() == Some(&a), || {
            failure(FailureKind::FixingPoint, Some(&a), x, None, format!("scan gives {scanned:?}"))
        });
    }
    if a > Scalar::zero() && &a <= q {
        let prev = tr
            .as_ref()
            .and_then(|tr| breakpoints(tr).into_iter().filter(|b| *b < a).max())
            .unwrap_or_else(Scalar::zero);
        let before = &a - (&a - prev) / int(2);
        if let Ok(v) = h.eval(&before, x) {
            report.check(&v != x, || failure(FailureKind::Minimality, Some(&before), x, Some(v.clone()), format!("already fixed before {a}")));
        }
    }
}

/// Checks that `big` extends `small`: `big(t, x) = small(t, x)` for sampled
/// `x` in the domain of `small` and `t ≤ q` of `small`.
pub fn verify_extension(small: &impl Deformation, big: &impl Deformation, samples: usize, seed: u64) -> RetractionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RetractionReport::default();
    let q = small.q().clone();
    for x in small.sample_domain(samples, &mut rng) {
        report.samples += 1;
        for t in probe_times(&q, None, &mut rng) {
            match (small.eval(&t, &x), big.eval(&t, &x)) {
                (Ok(a), Ok(b)) => report.check(a == b, || failure(FailureKind::Extension, Some(&t), &x, Some(b.clone()), format!("smaller map gives {a:?}"))),
                (Err(e), _) | (_, Err(e)) => report.check(false, || failure(FailureKind::Eval, Some(&t), &x, None, e.to_string())),
            }
        }
    }
    report
}

/// Checks that trajectories starting in the union of `cells` stay in it,
/// with `samples` points from each cell.
pub fn verify_interior(h: &impl Deformation, cells: &[LinearCell], samples: usize, seed: u64) -> RetractionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RetractionReport::default();
    let q = h.q().clone();
    let inside = |v: &[Scalar]| cells.iter().any(|c| c.contains(v).unwrap_or(false));
    for cell in cells {
        for x in sample_points_with(cell, samples, &mut rng).unwrap_or_default() {
            report.samples += 1;
            let alpha = h.fixing_point(&x);
            for t in probe_times(&q, alpha.as_ref(), &mut rng) {
                match h.eval(&t, &x) {
                    Ok(v) => report.check(inside(&v), || failure(FailureKind::Interior, Some(&t), &x, Some(v.clone()), "left the cells")),
                    Err(e) => report.check(false, || failure(FailureKind::Eval, Some(&t), &x, None, e.to_string())),
                }
            }
        }
    }
    report
}

/// [`verify_retraction`] on the glued map together with [`verify_extension`]
/// for every pair of pieces `D_i ⊆ cl(D_j)`, with `pair_samples` points each.
pub fn verify_glued(g: &GluedRetraction, samples: usize, pair_samples: usize, seed: u64) -> RetractionReport {
    let mut report = verify_retraction(g, samples, seed);
    let pieces = g.pieces();
    for (i, small) in pieces.iter().enumerate() {
        for (j, big) in pieces.iter().enumerate() {
            if i != j && small.cell().subset_of_closure(big.cell()) {
                let pair_seed = seed ^ ((i as u64) << 32 | j as u64);
                report.merge(verify_extension(small, big, pair_samples, pair_seed));
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomotopyReport {
    pub checks: usize,
    pub failures: Vec<Failure>,
}

impl HomotopyReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Evaluates `F` on a `grid × grid` lattice of `[0, q] × [0, p]` and checks
/// the start is constant, the end is the loop, the ends of the loop stay
/// together, and every value lies in the clipped carrier. Witnesses carry
/// `s` in place of `x`.
pub fn verify_homotopy(h: &LoopHomotopy, grid: usize) -> HomotopyReport {
    let mut report = HomotopyReport::default();
    let steps = int(grid.max(2) as i64 - 1);
    let at = |end: &Scalar, i: usize| end * int(i as i64) / &steps;
    let (q, p) = (h.q().clone(), h.p().clone());
    let mut push = |ok: bool, kind: FailureKind, t: &Scalar, s: &Scalar, value: Option<Point>| {
        report.checks += 1;
        if !ok {
            report.failures.push(failure(kind, Some(t), std::slice::from_ref(s), value, ""));
        }
    };
    let start = h.eval(&Scalar::zero(), &Scalar::zero()).ok();
    for i in 0..grid.max(2) {
        let t = at(&q, i);
        let (first, last) = (h.eval(&t, &Scalar::zero()).ok(), h.eval(&t, &p).ok());
        push(first.is_some() && first == last, FailureKind::LoopEnds, &t, &p, last.clone());
        for j in 0..grid.max(2) {
            let s = at(&p, j);
            let Ok(v) = h.eval(&t, &s) else {
                push(false, FailureKind::Image, &t, &s, None);
                continue;
            };
            push(h.clipped().union_contains(&v) && h.clipped().carrier.contains(&v), FailureKind::Image, &t, &s, Some(v.clone()));
            if i == 0 {
                push(Some(&v) == start.as_ref(), FailureKind::HomotopyStart, &t, &s, Some(v.clone()));
            }
            if t == q {
                let g = h.path().eval(&s).ok();
                push(Some(&v) == g.as_ref(), FailureKind::HomotopyEnd, &t, &s, Some(v.clone()));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::Label;
    use crate::retraction::{CanonicalRetraction, Mutation};
    use crate::scalar::ratio;
    use crate::AffineMap;

    fn worked() -> LinearCell {
        let base = LinearCell::interval(Some(int(0)), Some(int(4))).unwrap();
        LinearCell::band(&base, AffineMap::zero(1).into(), AffineMap::new(vec![ratio(1, 2)], int(2)).into()).unwrap()
    }

    #[test]
    fn canonical_retractions_pass() {
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let h = CanonicalRetraction::new(worked(), Label::from_bits(&bits)).unwrap();
            let r = verify_retraction(&h, 200, 7);
            assert!(r.is_ok(), "{bits:?}: {}", r.failures[0]);
            assert_eq!(r.samples, 251);
        }
    }

    #[test]
    fn mutations_are_caught() {
        for m in [Mutation::CaseTwoMax, Mutation::DropTimeTerm, Mutation::FullMap, Mutation::ShortTime, Mutation::AlphaDropsLastTerm] {
            let sigma = if m == Mutation::FullMap { [0, 1] } else { [0, 0] };
            let h = CanonicalRetraction::new(worked(), Label::from_bits(&sigma)).unwrap().with_mutation(m);
            let r = verify_retraction(&h, 100, 3);
            assert!(!r.is_ok(), "{m:?} slipped through");
        }
    }

    #[test]
    fn interior_is_preserved() {
        let d = worked();
        for bits in [[0, 0], [0, 1], [1, 0]] {
            let sigma = Label::from_bits(&bits);
            let face = d.sigma_face(&sigma).unwrap();
            let h = CanonicalRetraction::new(d.clone(), sigma).unwrap();
            let r = verify_interior(&h, &[face, d.clone()], 50, 1);
            assert!(r.is_ok(), "{bits:?}: {}", r.failures[0]);
        }
    }
}
