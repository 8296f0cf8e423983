use num_traits::One;

use crate::cell::{CornerLabel, LinearCell, Stage};
use crate::error::{Error, Result};
use crate::oracle::compare_on_cell;
use crate::scalar::{AffineMap, ExtAffine, Order, Point, Scalar};

/// The affine change of coordinates `T_{D,c}` taking a bounded cell `D` to a
/// canonical cell `D_c`, with the corner `c` going to the origin.
///
/// Each coordinate measures the distance to the side of its stage that the
/// corner label picks: `x_k − f(x)` on a graph or a floor, `g(x) − x_k` on a
/// ceiling.
#[derive(Clone, Debug)]
pub struct CornerTransform {
    label: CornerLabel,
    corner: Point,
    forward: Vec<AffineMap>,
    inverse: Vec<AffineMap>,
    image: LinearCell,
}

/// `f` (arity `k`) composed with the first `k` maps of `prefix`, as a map of
/// arity `n`.
fn compose_prefix(f: &AffineMap, prefix: &[AffineMap], n: usize) -> AffineMap {
    if f.arity() == 0 {
        AffineMap::constant(n, f.constant_term().clone())
    } else {
        f.compose(&prefix[..f.arity()])
    }
}

impl CornerTransform {
    pub fn new(cell: &LinearCell, label: &CornerLabel) -> Result<Self> {
        if !cell.is_bounded() {
            return Err(Error::Unbounded);
        }
        let corner = cell.corner(label)?;
        let n = cell.dim();
        let mut forward = Vec::with_capacity(n);
        let mut inverse: Vec<AffineMap> = Vec::with_capacity(n);
        let mut stages = Vec::with_capacity(n);
        for (k, stage) in cell.stages().iter().enumerate() {
            let (side, sign) = match stage {
                Stage::Graph(f) => (f, Scalar::one()),
                Stage::Band(lo, hi) => {
                    let (lo, hi) = (lo.finite().ok_or(Error::Unbounded)?, hi.finite().ok_or(Error::Unbounded)?);
                    let width = compose_prefix(&(hi - lo), &inverse, n).truncate(k);
                    stages.push(Stage::Band(AffineMap::zero(k).into(), width.into()));
                    if label.get(k) == 0 {
                        (lo, Scalar::one())
                    } else {
                        (hi, -Scalar::one())
                    }
                }
            };
            if let Stage::Graph(_) = stage {
                stages.push(Stage::Graph(AffineMap::zero(k)));
            }
            let xk = AffineMap::coordinate(n, k);
            forward.push(&(&xk - &side.lift(n)) * &sign);
            inverse.push(&compose_prefix(side, &inverse, n) + &(&xk * &sign));
        }
        let image = LinearCell::from_stages_unchecked(stages);
        debug_assert!(image.is_canonical());
        Ok(Self { label: label.clone(), corner, forward, inverse, image })
    }

    pub fn label(&self) -> &CornerLabel {
        &self.label
    }

    pub fn corner(&self) -> &Point {
        &self.corner
    }

    /// The canonical cell `D_c`.
    pub fn image(&self) -> &LinearCell {
        &self.image
    }

    pub fn forward_maps(&self) -> &[AffineMap] {
        &self.forward
    }

    pub fn inverse_maps(&self) -> &[AffineMap] {
        &self.inverse
    }

    pub fn apply(&self, x: &[Scalar]) -> Point {
        self.forward.iter().map(|f| f.eval_prefix(x)).collect()
    }

    pub fn invert(&self, z: &[Scalar]) -> Point {
        self.inverse.iter().map(|f| f.eval_prefix(z)).collect()
    }

    /// Whether `self` and `other` agree on the closure of `cell`.
    pub fn agrees_on(&self, other: &CornerTransform, cell: &LinearCell) -> Result<bool> {
        let n = cell.dim();
        for (a, b) in self.forward.iter().zip(&other.forward) {
            let diff = ExtAffine::Finite(a - b);
            if compare_on_cell(&diff, &ExtAffine::Finite(AffineMap::zero(n)), cell)? != Order::Equal {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, point, ratio};
    use num_traits::Zero;

    fn is_origin(x: &[Scalar]) -> bool {
        x.iter().all(Zero::is_zero)
    }

    /// `{0 < x < 2, x < y < 3}`.
    fn trapezoid() -> LinearCell {
        let base = LinearCell::interval(Some(int(0)), Some(int(2))).unwrap();
        LinearCell::band(&base, AffineMap::from_ints(&[1], 0).into(), AffineMap::from_ints(&[0], 3).into()).unwrap()
    }

    #[test]
    fn corners_go_to_origin() {
        let d = trapezoid();
        for (label, c) in d.corners().unwrap() {
            let t = CornerTransform::new(&d, &label).unwrap();
            assert!(is_origin(&t.apply(&c)), "{label}");
            assert_eq!(t.invert(&t.apply(&c)), c);
            assert!(t.image().is_canonical());
            let x = vec![int(1), ratio(5, 2)];
            assert_eq!(t.invert(&t.apply(&x)), x);
            assert!(t.image().contains(&t.apply(&x)).unwrap());
        }
    }

    #[test]
    fn image_of_trapezoid() {
        let d = trapezoid();
        // Corner (2, 2): right end, floor.
        let t = CornerTransform::new(&d, &CornerLabel::from_bits(&[1, 0])).unwrap();
        assert_eq!(t.corner(), &point(&[2, 2]));
        assert_eq!(t.apply(&point(&[2, 3])), point(&[0, 1]));
        // Width of the band at z = 2 - x is 3 - x = 1 + z.
        let top = t.image().upper(1).unwrap();
        assert_eq!(top, &AffineMap::from_ints(&[1], 1));
    }

    #[test]
    fn agreement_on_a_common_face() {
        let d = trapezoid();
        let floor = LinearCell::graph(&d.base().unwrap(), AffineMap::from_ints(&[1], 0)).unwrap();
        let a = CornerTransform::new(&d, &CornerLabel::from_bits(&[0, 0])).unwrap();
        let b = CornerTransform::new(&floor, &CornerLabel::from_bits(&[0, 0])).unwrap();
        assert!(a.agrees_on(&b, &floor).unwrap());
        let c = CornerTransform::new(&d, &CornerLabel::from_bits(&[0, 1])).unwrap();
        assert!(!c.agrees_on(&b, &floor).unwrap());
    }
}
