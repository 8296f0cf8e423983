use num_traits::Zero;
use rand::RngCore;

use crate::cell::{CornerLabel, HalfCell, HalfStage, LinearCell};
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::oracle::sup_over_system;
use crate::scalar::{max_scalar, Point, Scalar};

use super::pl::{PiecewiseLinear, Trajectory};
use super::star::{glue_star_retraction, map_trajectory, GluedRetraction};
use super::{check_time, Deformation};

/// Contraction of the half-cell `C'` of a canonical cell to a point.
///
/// On an interval `(0, a)` it is `max{a/2 − t, x}`. Over a band with half-map
/// `F`, the base contracts first while the fiber rides on `F`; afterwards the
/// fiber slides down from `F(x)` to `y`.
#[derive(Clone, Debug)]
pub struct HalfCellContraction {
    half: HalfCell,
    levels: Vec<Scalar>,
    target: Point,
    q: Scalar,
}

impl HalfCellContraction {
    pub fn new(cell: &LinearCell) -> Result<Self> {
        if !cell.is_bounded() {
            return Err(Error::Unbounded);
        }
        let half = cell.half_cell()?;
        let mut levels: Vec<Scalar> = Vec::with_capacity(half.dim());
        let mut target: Point = Vec::with_capacity(half.dim());
        for (k, stage) in half.stages().iter().enumerate() {
            let prev = levels.last().cloned().unwrap_or_else(Scalar::zero);
            let (q_k, c_k) = match stage {
                HalfStage::Zero => (prev, Scalar::zero()),
                HalfStage::UpTo(f) if k == 0 => (f.constant_term().clone(), f.constant_term().clone()),
                HalfStage::UpTo(f) => {
                    let sup = sup_over_system(f, &half.projection(k).closure_system())?;
                    (prev + sup, f.eval_prefix(&target))
                }
            };
            levels.push(q_k);
            target.push(c_k);
        }
        let q = levels.last().cloned().unwrap_or_else(Scalar::zero);
        Ok(Self { half, levels, target, q })
    }

    pub fn target(&self) -> &Point {
        &self.target
    }

    pub fn half_cell(&self) -> &HalfCell {
        &self.half
    }
}

impl Deformation for HalfCellContraction {
    fn dim(&self) -> usize {
        self.half.dim()
    }

    fn q(&self) -> &Scalar {
        &self.q
    }

    fn eval(&self, t: &Scalar, x: &[Scalar]) -> Result<Point> {
        if !self.half.contains(x) {
            return Err(Error::OutsideDomain);
        }
        check_time(t, &self.q)?;
        let mut img: Point = Vec::with_capacity(x.len());
        for (k, stage) in self.half.stages().iter().enumerate() {
            let v = match stage {
                HalfStage::Zero => Scalar::zero(),
                HalfStage::UpTo(f) if k == 0 => max_scalar(f.constant_term() - t, x[0].clone()),
                HalfStage::UpTo(f) => {
                    let prev = &self.levels[k - 1];
                    if t < prev {
                        f.eval_prefix(&img)
                    } else {
                        max_scalar(f.eval_prefix(x) - (t - prev), x[k].clone())
                    }
                }
            };
            img.push(v);
        }
        Ok(img)
    }

    fn in_domain(&self, x: &[Scalar]) -> bool {
        self.half.contains(x)
    }

    fn in_target(&self, x: &[Scalar]) -> bool {
        x == self.target.as_slice()
    }

    fn sample_domain(&self, k: usize, mut rng: &mut dyn RngCore) -> Vec<Point> {
        self.half.sample(k, &mut rng, false)
    }

    fn sample_target(&self, _k: usize, _rng: &mut dyn RngCore) -> Vec<Point> {
        vec![self.target.clone()]
    }

    fn fixing_point(&self, x: &[Scalar]) -> Option<Scalar> {
        if !self.half.contains(x) {
            return None;
        }
        let mut alpha = Scalar::zero();
        for (k, stage) in self.half.stages().iter().enumerate() {
            alpha = match stage {
                HalfStage::Zero => alpha,
                HalfStage::UpTo(f) if k == 0 => f.constant_term() - &x[0],
                HalfStage::UpTo(f) => {
                    let fx = f.eval_prefix(x);
                    if fx == x[k] {
                        alpha
                    } else {
                        &self.levels[k - 1] + fx - &x[k]
                    }
                }
            };
        }
        Some(alpha)
    }

    fn trajectory(&self, x: &[Scalar]) -> Option<Trajectory> {
        if !self.half.contains(x) {
            return None;
        }
        let zero = Scalar::zero();
        let q = &self.q;
        let id = PiecewiseLinear::identity(&zero, q);
        let mut tr: Trajectory = Vec::with_capacity(x.len());
        for (k, stage) in self.half.stages().iter().enumerate() {
            let cy = PiecewiseLinear::constant(x[k].clone(), &zero, q);
            let f = match stage {
                HalfStage::Zero => PiecewiseLinear::constant(zero.clone(), &zero, q),
                HalfStage::UpTo(f) if k == 0 => {
                    PiecewiseLinear::affine(&[(-Scalar::from_integer(1.into()), &id)], f.constant_term(), &zero, q).max(&cy)
                }
                HalfStage::UpTo(f) => {
                    let prev = &self.levels[k - 1];
                    let terms: Vec<(Scalar, &PiecewiseLinear)> = f.coeffs().iter().cloned().zip(tr.iter()).collect();
                    let riding = PiecewiseLinear::affine(&terms, f.constant_term(), &zero, q);
                    let sliding = PiecewiseLinear::affine(
                        &[(-Scalar::from_integer(1.into()), &id)],
                        &(f.eval_prefix(x) + prev),
                        &zero,
                        q,
                    )
                    .max(&cy);
                    riding.splice(&sliding, prev)
                }
            };
            tr.push(f);
        }
        Some(tr)
    }
}

/// A contraction of a bounded star `Y` to a point: the half-cell of the center
/// is first contracted (time `[0, q₀]`, pulled back through the corner
/// transform of the center), then the glued retraction runs backwards onto
/// it, shifted to `[q₀, q₀ + q]`.
#[derive(Clone, Debug)]
pub struct Contraction {
    glued: GluedRetraction,
    half: HalfCellContraction,
    q0: Scalar,
    q: Scalar,
    endpoint: Point,
}

pub fn contract(d: &Decomposition, center: usize, corner: &CornerLabel) -> Result<Contraction> {
    Contraction::new(glue_star_retraction(d, center, corner)?)
}

impl Contraction {
    pub fn new(glued: GluedRetraction) -> Result<Self> {
        let transform = glued.center_transform();
        let half = HalfCellContraction::new(glued.pieces()[glued.center()].canonical().face())?;
        let endpoint = transform.invert(half.target());
        let q0 = half.q().clone();
        let q = &q0 + glued.q();
        Ok(Self { glued, half, q0, q, endpoint })
    }

    pub fn endpoint(&self) -> &Point {
        &self.endpoint
    }

    pub fn glued(&self) -> &GluedRetraction {
        &self.glued
    }

    /// Length of the initial half-cell phase.
    pub fn q0(&self) -> &Scalar {
        &self.q0
    }
}

impl Deformation for Contraction {
    fn dim(&self) -> usize {
        self.glued.dim()
    }

    fn q(&self) -> &Scalar {
        &self.q
    }

    fn eval(&self, t: &Scalar, x: &[Scalar]) -> Result<Point> {
        check_time(t, &self.q)?;
        if t >= &self.q0 {
            return self.glued.eval(&(t - &self.q0), x);
        }
        let start = self.glued.eval(&Scalar::zero(), x)?;
        let transform = self.glued.center_transform();
        Ok(transform.invert(&self.half.eval(t, &transform.apply(&start))?))
    }

    fn in_domain(&self, x: &[Scalar]) -> bool {
        self.glued.in_domain(x)
    }

    fn in_target(&self, x: &[Scalar]) -> bool {
        x == self.endpoint.as_slice()
    }

    fn sample_domain(&self, k: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        self.glued.sample_domain(k, rng)
    }

    fn sample_target(&self, _k: usize, _rng: &mut dyn RngCore) -> Vec<Point> {
        vec![self.endpoint.clone()]
    }

    fn fixing_point(&self, x: &[Scalar]) -> Option<Scalar> {
        if self.glued.in_half_cell(x) {
            self.half.fixing_point(&self.glued.center_transform().apply(x))
        } else {
            Some(&self.q0 + self.glued.fixing_point(x)?)
        }
    }

    fn trajectory(&self, x: &[Scalar]) -> Option<Trajectory> {
        let later = self.glued.trajectory(x)?;
        let start = self.glued.eval(&Scalar::zero(), x).ok()?;
        let transform = self.glued.center_transform();
        let early = map_trajectory(transform, &self.half.trajectory(&transform.apply(&start))?);
        Some(early.iter().zip(&later).map(|(a, b)| a.then(b)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, point, ratio};
    use crate::AffineMap;

    fn band() -> LinearCell {
        let base = LinearCell::interval(Some(int(0)), Some(int(4))).unwrap();
        LinearCell::band(&base, AffineMap::zero(1).into(), AffineMap::new(vec![ratio(1, 2)], int(2)).into()).unwrap()
    }

    #[test]
    fn interval_contraction() {
        let h = HalfCellContraction::new(&LinearCell::interval(Some(int(0)), Some(int(4))).unwrap()).unwrap();
        assert_eq!(h.q(), &int(2));
        assert_eq!(h.target(), &point(&[2]));
        assert!(matches!(h.eval(&int(1), &point(&[0])), Err(Error::OutsideDomain)));
        assert_eq!(h.eval(&int(1), &[ratio(1, 2)]).unwrap(), point(&[1]));
        assert_eq!(h.eval(&int(0), &[ratio(1, 2)]).unwrap(), point(&[2]));
        let p = HalfCellContraction::new(&LinearCell::point(int(0))).unwrap();
        assert_eq!(p.q(), &int(0));
    }

    #[test]
    fn band_contraction_target() {
        let h = HalfCellContraction::new(&band()).unwrap();
        assert_eq!(h.target(), &vec![int(2), ratio(3, 2)]);
        for x in [vec![int(1), ratio(1, 2)], vec![int(2), ratio(3, 2)], vec![ratio(1, 3), ratio(1, 5)]] {
            assert_eq!(h.eval(&int(0), &x).unwrap(), *h.target());
            assert_eq!(h.eval(h.q(), &x).unwrap(), x);
            let tr = h.trajectory(&x).unwrap();
            assert_eq!(super::super::pl::first_fixed_time(&tr, &x), h.fixing_point(&x));
        }
    }
}
