//! Continuous piecewise-linear functions of one variable, used to follow a
//! single trajectory `t ↦ H(t, x)` symbolically.

use num_traits::{Signed, Zero};

use crate::scalar::{max_scalar, min_scalar, Point, Scalar};

/// Knots `t₀ < … < t_m` with the values at each knot, linear in between.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear {
    knots: Vec<Scalar>,
    values: Vec<Scalar>,
}

impl PiecewiseLinear {
    pub fn constant(v: Scalar, lo: &Scalar, hi: &Scalar) -> Self {
        Self::from_knots(vec![lo.clone(), hi.clone()], vec![v.clone(), v])
    }

    pub fn identity(lo: &Scalar, hi: &Scalar) -> Self {
        Self::from_knots(vec![lo.clone(), hi.clone()], vec![lo.clone(), hi.clone()])
    }

    /// `t ↦ min(t, cap)` on `[lo, hi]`.
    pub fn clamped_identity(cap: &Scalar, lo: &Scalar, hi: &Scalar) -> Self {
        Self::identity(lo, hi).min(&Self::constant(cap.clone(), lo, hi))
    }

    fn from_knots(mut knots: Vec<Scalar>, mut values: Vec<Scalar>) -> Self {
        debug_assert_eq!(knots.len(), values.len());
        if knots.len() == 2 && knots[0] == knots[1] {
            knots.pop();
            values.pop();
        }
        let mut out = Self { knots, values };
        out.simplify();
        out
    }

    pub fn lo(&self) -> &Scalar {
        &self.knots[0]
    }

    pub fn hi(&self) -> &Scalar {
        self.knots.last().expect("nonempty")
    }

    pub fn knots(&self) -> &[Scalar] {
        &self.knots
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    /// Value at `t`, which must lie in the domain.
    pub fn eval(&self, t: &Scalar) -> Scalar {
        debug_assert!(t >= self.lo() && t <= self.hi(), "t outside domain");
        let i = self.knots.partition_point(|k| k <= t);
        if i == 0 {
            return self.values[0].clone();
        }
        if i == self.knots.len() {
            return self.values[i - 1].clone();
        }
        let (t0, t1) = (&self.knots[i - 1], &self.knots[i]);
        let (v0, v1) = (&self.values[i - 1], &self.values[i]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Drops knots where the function does not bend.
    fn simplify(&mut self) {
        if self.knots.len() <= 2 {
            return;
        }
        let mut ks = vec![self.knots[0].clone()];
        let mut vs = vec![self.values[0].clone()];
        for i in 1..self.knots.len() - 1 {
            let (t0, v0) = (ks.last().unwrap(), vs.last().unwrap());
            let (t1, v1) = (&self.knots[i], &self.values[i]);
            let (t2, v2) = (&self.knots[i + 1], &self.values[i + 1]);
            // Keep t1 unless (t0,v0), (t1,v1), (t2,v2) are collinear.
            if (v1 - v0) * (t2 - t1) != (v2 - v1) * (t1 - t0) {
                ks.push(t1.clone());
                vs.push(v1.clone());
            }
        }
        ks.push(self.knots.last().unwrap().clone());
        vs.push(self.values.last().unwrap().clone());
        self.knots = ks;
        self.values = vs;
    }

    fn merged_knots(fs: &[&PiecewiseLinear]) -> Vec<Scalar> {
        let mut ks: Vec<Scalar> = fs.iter().flat_map(|f| f.knots.iter().cloned()).collect();
        ks.sort();
        ks.dedup();
        ks
    }

    /// `Σ wᵢ fᵢ + c`; all functions share one domain.
    pub fn affine(terms: &[(Scalar, &PiecewiseLinear)], c: &Scalar, lo: &Scalar, hi: &Scalar) -> Self {
        let fs: Vec<&PiecewiseLinear> = terms.iter().filter(|(w, _)| !w.is_zero()).map(|(_, f)| *f).collect();
        if fs.is_empty() {
            return Self::constant(c.clone(), lo, hi);
        }
        let ks = Self::merged_knots(&fs);
        let vs = ks
            .iter()
            .map(|t| {
                terms
                    .iter()
                    .filter(|(w, _)| !w.is_zero())
                    .fold(c.clone(), |acc, (w, f)| acc + w * f.eval(t))
            })
            .collect();
        Self::from_knots(ks, vs)
    }

    pub fn add_scalar(&self, c: &Scalar) -> Self {
        Self::from_knots(self.knots.clone(), self.values.iter().map(|v| v + c).collect())
    }

    fn combine(&self, other: &Self, pick: fn(Scalar, Scalar) -> Scalar) -> Self {
        let base = Self::merged_knots(&[self, other]);
        let mut ks = Vec::with_capacity(base.len() * 2);
        let mut vs = Vec::with_capacity(base.len() * 2);
        for (i, t) in base.iter().enumerate() {
            if i > 0 {
                let t0 = &base[i - 1];
                let d0 = self.eval(t0) - other.eval(t0);
                let d1 = self.eval(t) - other.eval(t);
                if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                    let tc = t0 + (t - t0) * &d0 / (&d0 - &d1);
                    vs.push(self.eval(&tc));
                    ks.push(tc);
                }
            }
            vs.push(pick(self.eval(t), other.eval(t)));
            ks.push(t.clone());
        }
        Self::from_knots(ks, vs)
    }

    pub fn min(&self, other: &Self) -> Self {
        self.combine(other, min_scalar)
    }

    pub fn max(&self, other: &Self) -> Self {
        self.combine(other, max_scalar)
    }

    /// `self` on `[lo, at)`, `other` on `[at, hi]`. The two must agree at
    /// `at` for the result to be continuous.
    pub fn splice(&self, other: &Self, at: &Scalar) -> Self {
        if at <= self.lo() {
            return other.clone();
        }
        if at >= self.hi() {
            let mut out = self.clone();
            let last = out.values.len() - 1;
            out.values[last] = other.eval(self.hi());
            return out;
        }
        let mut ks: Vec<Scalar> = self.knots.iter().filter(|k| *k < at).cloned().collect();
        let mut vs: Vec<Scalar> = ks.iter().map(|k| self.eval(k)).collect();
        ks.push(at.clone());
        vs.push(other.eval(at));
        for k in other.knots.iter().filter(|k| *k > at) {
            ks.push(k.clone());
            vs.push(other.eval(k));
        }
        Self::from_knots(ks, vs)
    }

    /// `t ↦ self(min(t, cap))` on `[lo, hi]`.
    pub fn hold_after(&self, cap: &Scalar, hi: &Scalar) -> Self {
        let mut ks: Vec<Scalar> = self.knots.iter().filter(|k| *k < cap).cloned().collect();
        let mut vs: Vec<Scalar> = ks.iter().map(|k| self.eval(k)).collect();
        let end = self.eval(cap);
        ks.push(cap.clone());
        vs.push(end.clone());
        if hi > cap {
            ks.push(hi.clone());
            vs.push(end);
        }
        Self::from_knots(ks, vs)
    }

    /// `self` on `[lo, b]` followed by `other` shifted to start at `b`.
    pub fn then(&self, other: &Self) -> Self {
        let b = self.hi().clone();
        let shift = &b - other.lo();
        let mut ks = self.knots.clone();
        let mut vs = self.values.clone();
        for (k, v) in other.knots.iter().zip(&other.values).skip(1) {
            ks.push(k + &shift);
            vs.push(v.clone());
        }
        Self::from_knots(ks, vs)
    }
}

/// A trajectory: one piecewise-linear function per coordinate.
pub type Trajectory = Vec<PiecewiseLinear>;

pub fn eval_trajectory(tr: &[PiecewiseLinear], t: &Scalar) -> Point {
    tr.iter().map(|f| f.eval(t)).collect()
}

/// All knots of all coordinates.
pub fn breakpoints(tr: &[PiecewiseLinear]) -> Vec<Scalar> {
    PiecewiseLinear::merged_knots(&tr.iter().collect::<Vec<_>>())
}

/// The least `t` with `tr(t) = x`, found piece by piece.
pub fn first_fixed_time(tr: &[PiecewiseLinear], x: &[Scalar]) -> Option<Scalar> {
    if tr.is_empty() {
        return None;
    }
    let ks = breakpoints(tr);
    if ks.len() == 1 {
        return (eval_trajectory(tr, &ks[0]) == x).then(|| ks[0].clone());
    }
    for w in ks.windows(2) {
        let (t0, t1) = (&w[0], &w[1]);
        // On [t0, t1] every coordinate is affine; intersect the sets where
        // each equals its target.
        let mut lo = t0.clone();
        let mut hi = t1.clone();
        let mut empty = false;
        for (f, target) in tr.iter().zip(x) {
            let v0 = f.eval(t0);
            let v1 = f.eval(t1);
            if v0 == v1 {
                if &v0 != target {
                    empty = true;
                    break;
                }
                continue;
            }
            let tc = t0 + (t1 - t0) * (target - &v0) / (&v1 - &v0);
            if tc < *t0 || tc > *t1 {
                empty = true;
                break;
            }
            lo = max_scalar(lo, tc.clone());
            hi = min_scalar(hi, tc);
        }
        if !empty && lo <= hi {
            return Some(lo);
        }
    }
    None
}
