use num_traits::Zero;
use rand::RngCore;

use crate::cell::{HalfCell, LinearCell, SigmaLabel, Stage};
use crate::error::{Error, Result};
use crate::oracle::{sample_closure_points_with, sample_points_with, sup_over_closure};
use crate::scalar::{max_scalar, min_scalar, AffineMap, Point, Scalar};

use super::pl::{first_fixed_time, PiecewiseLinear, Trajectory};
use super::{Deformation, Mutation};

/// The canonical retraction of `cl(D)` onto the closed half-cell `cl(C')` of
/// a face `C = D_σ` of a bounded canonical cell `D`.
///
/// Level by level, with `y` the last coordinate, `F` half the upper map and
/// `α_x` the fixing time of the base:
///
/// * graph stage: `0`;
/// * first coordinate: `min{y, t + a/2}` if kept, `min{y, t}` if collapsed;
/// * band kept as a band (`j = 1`): `min{y, F(H(t, x))}` before `α_x`,
///   `min{y, t − α_x + F(x)}` after;
/// * band collapsed to its floor (`j = 0`): the same with `t` inside the min.
///
/// Each level runs until `q_k = q_{k-1} + sup g_k`, where the sup is over the
/// closure of the base.
#[derive(Clone, Debug)]
pub struct CanonicalRetraction {
    cell: LinearCell,
    sigma: SigmaLabel,
    face: LinearCell,
    half: HalfCell,
    levels: Vec<Scalar>,
    halves: Vec<Option<AffineMap>>,
    q: Scalar,
    mutation: Mutation,
}

impl CanonicalRetraction {
    pub fn new(cell: LinearCell, sigma: SigmaLabel) -> Result<Self> {
        if !cell.is_bounded() {
            return Err(Error::Unbounded);
        }
        if !cell.is_canonical() {
            return Err(Error::NotCanonical);
        }
        let face = cell.sigma_face(&sigma)?;
        let half = face.half_cell()?;
        let n = cell.dim();
        let mut levels = Vec::with_capacity(n);
        let mut halves = Vec::with_capacity(n);
        for k in 0..n {
            let (g, half_map) = match cell.stage(k) {
                Stage::Graph(_) => (None, None),
                Stage::Band(_, hi) => {
                    let g = hi.finite().expect("bounded canonical band").clone();
                    let h = g.half();
                    (Some(g), Some(h))
                }
            };
            let prev = levels.last().cloned().unwrap_or_else(Scalar::zero);
            let q_k = match (&g, k) {
                (None, _) => prev,
                (Some(g), 0) => g.constant_term().clone(),
                (Some(g), _) => prev + sup_over_closure(g, &cell.projection(k)?)?,
            };
            levels.push(q_k);
            halves.push(half_map);
        }
        let q = levels.last().cloned().unwrap_or_else(Scalar::zero);
        Ok(Self { cell, sigma, face, half, levels, halves, q, mutation: Mutation::None })
    }

    #[doc(hidden)]
    pub fn with_mutation(mut self, m: Mutation) -> Self {
        self.mutation = m;
        if m == Mutation::ShortTime {
            self.q = &self.q / Scalar::from_integer(2.into());
        }
        self
    }

    pub fn cell(&self) -> &LinearCell {
        &self.cell
    }

    pub fn sigma(&self) -> &SigmaLabel {
        &self.sigma
    }

    pub fn face(&self) -> &LinearCell {
        &self.face
    }

    pub fn half_cell(&self) -> &HalfCell {
        &self.half
    }

    /// `q_k` for every level.
    pub fn levels(&self) -> &[Scalar] {
        &self.levels
    }

    fn kind(&self, k: usize) -> Kind {
        match (self.cell.index().get(k), self.sigma.get(k)) {
            (0, _) => Kind::Graph,
            (_, 1) => Kind::Keep,
            _ => Kind::Collapse,
        }
    }

    fn half_map(&self, k: usize) -> AffineMap {
        let f = self.halves[k].as_ref().expect("band level").clone();
        if self.mutation == Mutation::FullMap {
            f.scale(&Scalar::from_integer(2.into()))
        } else {
            f
        }
    }

    fn check(&self, t: &Scalar, x: &[Scalar]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Arity { expected: self.dim(), got: x.len() });
        }
        if !self.cell.closure_contains(x)? {
            return Err(Error::OutsideDomain);
        }
        super::check_time(t, &self.q)
    }

    /// Closed-form fixing times of every prefix of `x`.
    fn alphas(&self, x: &[Scalar]) -> Vec<Scalar> {
        let mut out = Vec::with_capacity(x.len());
        let mut alpha = Scalar::zero();
        for (k, y) in x.iter().enumerate() {
            alpha = match self.kind(k) {
                Kind::Graph => alpha,
                Kind::Keep if k == 0 => max_scalar(Scalar::zero(), y - self.half_map(0).constant_term()),
                Kind::Collapse if k == 0 => y.clone(),
                Kind::Keep => {
                    let fx = self.half_map(k).eval_prefix(x);
                    max_scalar(alpha.clone(), y + &alpha - fx)
                }
                Kind::Collapse => {
                    let fx = self.half_map(k).eval_prefix(x);
                    if self.mutation == Mutation::AlphaDropsLastTerm {
                        max_scalar(alpha, y.clone())
                    } else {
                        max_scalar(max_scalar(alpha.clone(), y.clone()), y + &alpha - fx)
                    }
                }
            };
            out.push(alpha.clone());
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Graph,
    Keep,
    Collapse,
}

impl Deformation for CanonicalRetraction {
    fn dim(&self) -> usize {
        self.cell.dim()
    }

    fn q(&self) -> &Scalar {
        &self.q
    }

    fn eval(&self, t: &Scalar, x: &[Scalar]) -> Result<Point> {
        self.check(t, x)?;
        let alphas = self.alphas(x);
        let mut img: Point = Vec::with_capacity(x.len());
        for (k, y) in x.iter().enumerate() {
            let tk = min_scalar(t.clone(), self.levels[k].clone());
            let v = match self.kind(k) {
                Kind::Graph => Scalar::zero(),
                Kind::Keep if k == 0 => min_scalar(y.clone(), tk + self.half_map(0).constant_term()),
                Kind::Collapse if k == 0 => min_scalar(tk, y.clone()),
                kind => {
                    let alpha = &alphas[k - 1];
                    let f = self.half_map(k);
                    let with_t = kind == Kind::Collapse && self.mutation != Mutation::DropTimeTerm;
                    let (last, before) = if tk < *alpha {
                        (f.eval_prefix(&img), true)
                    } else {
                        (&tk - alpha + f.eval_prefix(x), false)
                    };
                    let pick = if before && kind == Kind::Collapse && self.mutation == Mutation::CaseTwoMax {
                        max_scalar
                    } else {
                        min_scalar
                    };
                    let v = pick(y.clone(), last);
                    if with_t {
                        pick(v, tk)
                    } else {
                        v
                    }
                }
            };
            img.push(v);
        }
        Ok(img)
    }

    fn in_domain(&self, x: &[Scalar]) -> bool {
        self.cell.closure_contains(x).unwrap_or(false)
    }

    fn in_target(&self, x: &[Scalar]) -> bool {
        self.half.closure_contains(x)
    }

    fn sample_domain(&self, k: usize, mut rng: &mut dyn RngCore) -> Vec<Point> {
        let open = k / 2;
        let mut pts = sample_points_with(&self.cell, open, &mut rng).unwrap_or_default();
        pts.extend(sample_closure_points_with(&self.cell, k - open, &mut rng).unwrap_or_default());
        pts
    }

    fn sample_target(&self, k: usize, mut rng: &mut dyn RngCore) -> Vec<Point> {
        self.half.sample(k, &mut rng, true)
    }

    fn fixing_point(&self, x: &[Scalar]) -> Option<Scalar> {
        if !self.in_domain(x) {
            return None;
        }
        self.alphas(x).pop()
    }

    fn trajectory(&self, x: &[Scalar]) -> Option<Trajectory> {
        if !self.in_domain(x) {
            return None;
        }
        let zero = Scalar::zero();
        let q = self.levels.last().cloned().unwrap_or_default();
        let mut tr: Trajectory = Vec::with_capacity(x.len());
        for (k, y) in x.iter().enumerate() {
            let tk = PiecewiseLinear::clamped_identity(&self.levels[k], &zero, &q);
            let cy = PiecewiseLinear::constant(y.clone(), &zero, &q);
            let f = match self.kind(k) {
                Kind::Graph => PiecewiseLinear::constant(zero.clone(), &zero, &q),
                Kind::Keep if k == 0 => cy.min(&tk.add_scalar(self.halves[0].as_ref()?.constant_term())),
                Kind::Collapse if k == 0 => tk.min(&cy),
                kind => {
                    // The base fixing time, found by scanning the base
                    // trajectory rather than by the closed form.
                    let alpha = first_fixed_time(&tr, &x[..k])?;
                    let g = self.halves[k].as_ref()?;
                    let terms: Vec<(Scalar, &PiecewiseLinear)> =
                        g.coeffs().iter().cloned().zip(tr.iter()).collect();
                    let f_img = PiecewiseLinear::affine(&terms, g.constant_term(), &zero, &q);
                    let shifted = tk.add_scalar(&(g.eval_prefix(x) - &alpha));
                    let (mut before, mut after) = (cy.min(&f_img), cy.min(&shifted));
                    if kind == Kind::Collapse {
                        before = before.min(&tk);
                        after = after.min(&tk);
                    }
                    before.splice(&after, &alpha)
                }
            };
            tr.push(f);
        }
        Some(tr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::Label;
    use crate::scalar::{int, point, ratio};

    /// `D = {0 < x < 4, 0 < y < x/2 + 2}`.
    fn worked() -> LinearCell {
        let base = LinearCell::interval(Some(int(0)), Some(int(4))).unwrap();
        LinearCell::band(
            &base,
            AffineMap::zero(1).into(),
            AffineMap::new(vec![ratio(1, 2)], int(2)).into(),
        )
        .unwrap()
    }

    #[test]
    fn worked_example_values() {
        let h = CanonicalRetraction::new(worked(), Label::from_bits(&[0, 0])).unwrap();
        assert_eq!(h.q(), &int(8));
        assert_eq!(h.levels(), &[int(4), int(8)]);
        let x = point(&[2, 1]);
        assert_eq!(h.eval(&int(1), &x).unwrap(), point(&[1, 1]));
        assert_eq!(h.eval(&int(8), &x).unwrap(), x);
        assert_eq!(h.eval(&int(0), &x).unwrap(), point(&[0, 0]));
        assert_eq!(h.fixing_point(&x), Some(int(2)));

        let h = CanonicalRetraction::new(worked(), Label::from_bits(&[0, 1])).unwrap();
        assert_eq!(h.eval(&int(3), &x).unwrap(), x);
        // Before the base is fixed the last coordinate is capped by F.
        assert_eq!(h.eval(&int(0), &point(&[2, 2])).unwrap(), vec![int(0), int(1)]);
    }

    #[test]
    fn rejects_bad_arguments() {
        let h = CanonicalRetraction::new(worked(), Label::from_bits(&[1, 0])).unwrap();
        assert!(matches!(h.eval(&int(9), &point(&[2, 1])), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(h.eval(&int(1), &point(&[2, 5])), Err(Error::OutsideDomain)));
        let unbounded = LinearCell::interval(Some(int(0)), None).unwrap();
        assert!(matches!(CanonicalRetraction::new(unbounded, Label::from_bits(&[0])), Err(Error::Unbounded)));
        let shifted = LinearCell::interval(Some(int(1)), Some(int(2))).unwrap();
        assert!(matches!(CanonicalRetraction::new(shifted, Label::from_bits(&[0])), Err(Error::NotCanonical)));
    }

    #[test]
    fn trajectory_matches_eval_and_alpha() {
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let h = CanonicalRetraction::new(worked(), Label::from_bits(&bits)).unwrap();
            for x in [point(&[2, 1]), point(&[4, 4]), point(&[0, 0]), vec![ratio(1, 3), ratio(1, 7)]] {
                let tr = h.trajectory(&x).unwrap();
                for i in 0..=16 {
                    let t = ratio(i, 2);
                    assert_eq!(super::super::pl::eval_trajectory(&tr, &t), h.eval(&t, &x).unwrap(), "{bits:?} {x:?} {t}");
                }
                assert_eq!(first_fixed_time(&tr, &x), h.fixing_point(&x));
            }
        }
    }
}
