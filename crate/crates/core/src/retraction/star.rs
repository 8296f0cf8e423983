use num_traits::Zero;
use rand::{Rng, RngCore};

use crate::cell::{CornerLabel, LinearCell, SigmaLabel};
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::oracle::sample_points_with;
use crate::scalar::{min_scalar, max_scalar, Point, Scalar};

use super::canonical::CanonicalRetraction;
use super::pl::{PiecewiseLinear, Trajectory};
use super::transform::CornerTransform;
use super::{check_time, Deformation, Mutation};

/// A corner shared by two cells, with its label in each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedCorner {
    pub point: Point,
    pub label_c: CornerLabel,
    pub label_d: CornerLabel,
}

/// Corners of `c` that are also corners of `d`, paired by label. In a special
/// decomposition every corner of `c` shows up when `c` meets `cl(d)`.
pub fn common_corner(c: &LinearCell, d: &LinearCell) -> Result<Vec<SharedCorner>> {
    if !c.meets_closure_of(d) {
        return Err(Error::Hypothesis("cell does not meet the closure of the other".into()));
    }
    let dc = d.corners()?;
    let mut out = Vec::new();
    for (lc, p) in c.corners()? {
        for (ld, q) in &dc {
            if *q == p {
                out.push(SharedCorner { point: p.clone(), label_c: lc.clone(), label_d: ld.clone() });
            }
        }
    }
    Ok(out)
}

/// `H_c = T⁻¹ ∘ H ∘ T` on the closure of a bounded cell `D`, where `T` is the
/// canonical transformation at a corner and `H` the canonical retraction of
/// `D_c` onto the half-cell of the face given by `C`.
#[derive(Clone, Debug)]
pub struct CRetraction {
    cell: LinearCell,
    transform: CornerTransform,
    inner: CanonicalRetraction,
}

impl CRetraction {
    pub fn new(cell: LinearCell, label: &CornerLabel, sigma: &SigmaLabel) -> Result<Self> {
        let transform = CornerTransform::new(&cell, label)?;
        let inner = CanonicalRetraction::new(transform.image().clone(), sigma.clone())?;
        Ok(Self { cell, transform, inner })
    }

    /// The retraction of `cl(d)` onto the `c`-half-cell of `c_cell`, with the
    /// first label of `d` that [`CRetraction::labels_towards`] allows.
    pub fn towards(d: &LinearCell, c_cell: &LinearCell, c_label: &CornerLabel) -> Result<Self> {
        let label = Self::labels_towards(d, c_cell, c_label)?.swap_remove(0);
        Self::new(d.clone(), &label, &c_cell.index())
    }

    /// Labels of `d` at the corner of `c_cell` whose transform agrees with
    /// that of `c_cell` and makes its image a face. When the corner is a pinch
    /// of a band, both labels of that stage can qualify.
    pub fn labels_towards(d: &LinearCell, c_cell: &LinearCell, c_label: &CornerLabel) -> Result<Vec<CornerLabel>> {
        let tc = CornerTransform::new(c_cell, c_label)?;
        let corner = tc.corner().clone();
        if !c_cell.subset_of_closure(d) {
            return Err(Error::Hypothesis(format!("{c_cell} is not in the closure of {d}")));
        }
        let sigma = c_cell.index();
        let mut out = Vec::new();
        for label in d.index().below() {
            if d.corner(&label)? != corner || !sigma.le(&d.index()) {
                continue;
            }
            let td = CornerTransform::new(d, &label)?;
            if td.agrees_on(&tc, c_cell)? && tc.image().is_face_of(td.image()) {
                out.push(label);
            }
        }
        if out.is_empty() {
            return Err(Error::Hypothesis(format!("no corner of {d} matches the corner {c_label} of {c_cell}")));
        }
        Ok(out)
    }

    #[doc(hidden)]
    pub fn with_mutation(mut self, m: Mutation) -> Self {
        self.inner = self.inner.with_mutation(m);
        self
    }

    pub fn cell(&self) -> &LinearCell {
        &self.cell
    }

    pub fn transform(&self) -> &CornerTransform {
        &self.transform
    }

    pub fn canonical(&self) -> &CanonicalRetraction {
        &self.inner
    }
}

impl Deformation for CRetraction {
    fn dim(&self) -> usize {
        self.cell.dim()
    }

    fn q(&self) -> &Scalar {
        self.inner.q()
    }

    fn eval(&self, t: &Scalar, x: &[Scalar]) -> Result<Point> {
        if x.len() != self.dim() {
            return Err(Error::Arity { expected: self.dim(), got: x.len() });
        }
        let z = self.inner.eval(t, &self.transform.apply(x))?;
        Ok(self.transform.invert(&z))
    }

    fn in_domain(&self, x: &[Scalar]) -> bool {
        self.cell.closure_contains(x).unwrap_or(false)
    }

    fn in_target(&self, x: &[Scalar]) -> bool {
        x.len() == self.dim() && self.inner.in_target(&self.transform.apply(x))
    }

    fn sample_domain(&self, k: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        self.inner.sample_domain(k, rng).iter().map(|z| self.transform.invert(z)).collect()
    }

    fn sample_target(&self, k: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        self.inner.sample_target(k, rng).iter().map(|z| self.transform.invert(z)).collect()
    }

    fn fixing_point(&self, x: &[Scalar]) -> Option<Scalar> {
        (x.len() == self.dim()).then(|| self.inner.fixing_point(&self.transform.apply(x))).flatten()
    }

    fn trajectory(&self, x: &[Scalar]) -> Option<Trajectory> {
        if x.len() != self.dim() {
            return None;
        }
        let tr = self.inner.trajectory(&self.transform.apply(x))?;
        Some(map_trajectory(&self.transform, &tr))
    }
}

/// Applies the inverse transform coordinatewise to a trajectory.
pub(crate) fn map_trajectory(transform: &CornerTransform, tr: &[PiecewiseLinear]) -> Trajectory {
    let (lo, hi) = (tr[0].lo().clone(), tr[0].hi().clone());
    transform
        .inverse_maps()
        .iter()
        .map(|f| {
            let terms: Vec<(Scalar, &PiecewiseLinear)> = f.coeffs().iter().cloned().zip(tr).collect();
            PiecewiseLinear::affine(&terms, f.constant_term(), &lo, &hi)
        })
        .collect()
}

/// The retraction of a bounded star `Y = D₁ ∪ … ∪ D_m` onto the `c`-half-cell
/// `C'` of its center: `H(t, x) = H_i(min{t, q_i}, x)` for `x ∈ D_i`.
#[derive(Clone, Debug)]
pub struct GluedRetraction {
    cells: Vec<LinearCell>,
    center: usize,
    pieces: Vec<CRetraction>,
    q: Scalar,
    mutation: Mutation,
}

/// Glues the corner retractions of every cell of `d` towards the cell
/// `center` at the corner with label `corner`.
///
/// Every cell of `d` must have a closure meeting the center, `d` must be
/// special and its cells bounded.
pub fn glue_star_retraction(d: &Decomposition, center: usize, corner: &CornerLabel) -> Result<GluedRetraction> {
    d.check_shape()?;
    let c_cell = d.cell(center)?.clone();
    if d.cells.iter().any(|cell| !cell.is_bounded()) {
        return Err(Error::Unbounded);
    }
    if !d.special {
        return Err(Error::NotSpecial);
    }
    if let Some(i) = d.cells.iter().position(|cell| !c_cell.meets_closure_of(cell)) {
        return Err(Error::Hypothesis(format!("the closure of cell {i} misses the center cell {center}")));
    }
    let candidates =
        d.cells.iter().map(|cell| CRetraction::labels_towards(cell, &c_cell, corner)).collect::<Result<Vec<_>>>()?;
    let labels = coherent_labels(&d.cells, &candidates)?;
    let sigma = c_cell.index();
    let pieces: Vec<CRetraction> =
        d.cells.iter().zip(&labels).map(|(cell, l)| CRetraction::new(cell.clone(), l, &sigma)).collect::<Result<_>>()?;
    let q = pieces.iter().map(|p| p.q().clone()).max().unwrap_or_else(Scalar::zero);
    Ok(GluedRetraction { cells: d.cells.clone(), center, pieces, q, mutation: Mutation::None })
}

/// One label per cell such that whenever `D_i ⊆ cl(D_j)` the transforms of
/// `D_j` and `D_i` agree on `cl(D_i)`, found by backtracking. Continuity of
/// the glued map needs this for every such pair, not only for the center. It
/// fails when a band pinched at the corner has both its floor and its ceiling
/// in the star.
fn coherent_labels(cells: &[LinearCell], candidates: &[Vec<CornerLabel>]) -> Result<Vec<CornerLabel>> {
    let m = cells.len();
    let transforms: Vec<Vec<CornerTransform>> = cells
        .iter()
        .zip(candidates)
        .map(|(cell, ls)| ls.iter().map(|l| CornerTransform::new(cell, l)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut below = vec![vec![false; m]; m];
    for i in 0..m {
        for j in 0..m {
            below[i][j] = i != j && cells[i].subset_of_closure(&cells[j]);
        }
    }
    let mut choice = vec![0usize; m];
    let mut i = 0usize;
    let mut tried_all = false;
    while i < m {
        let mut found = false;
        while choice[i] < candidates[i].len() {
            let ti = &transforms[i][choice[i]];
            let mut ok = true;
            for j in 0..i {
                let tj = &transforms[j][choice[j]];
                let agree = |small: usize, a: &CornerTransform, b: &CornerTransform| a.agrees_on(b, &cells[small]);
                if (below[i][j] && !agree(i, tj, ti)?) || (below[j][i] && !agree(j, ti, tj)?) {
                    ok = false;
                    break;
                }
            }
            if ok {
                found = true;
                break;
            }
            choice[i] += 1;
        }
        if found {
            i += 1;
            continue;
        }
        choice[i] = 0;
        if i == 0 {
            tried_all = true;
            break;
        }
        i -= 1;
        choice[i] += 1;
    }
    if tried_all {
        let pair = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .find(|&(i, j)| below[i][j] && candidates[j].len() > 1)
            .map(|(i, j)| format!(" (cells {i} and {j})"))
            .unwrap_or_default();
        return Err(Error::Hypothesis(format!("no corner labels make the cell retractions agree on shared closures{pair}")));
    }
    Ok(choice.iter().zip(candidates).map(|(&k, ls)| ls[k].clone()).collect())
}

impl GluedRetraction {
    #[doc(hidden)]
    pub fn with_mutation(mut self, m: Mutation) -> Self {
        if m == Mutation::NoClamp {
            self.mutation = m;
        } else {
            self.pieces = self.pieces.into_iter().map(|p| p.with_mutation(m)).collect();
            if m == Mutation::ShortTime {
                self.q = self.pieces.iter().map(|p| p.q().clone()).max().unwrap_or_else(Scalar::zero);
            }
        }
        self
    }

    pub fn cells(&self) -> &[LinearCell] {
        &self.cells
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn center_cell(&self) -> &LinearCell {
        &self.cells[self.center]
    }

    pub fn pieces(&self) -> &[CRetraction] {
        &self.pieces
    }

    /// The transform of the center cell at the chosen corner.
    pub fn center_transform(&self) -> &CornerTransform {
        self.pieces[self.center].transform()
    }

    pub fn corner(&self) -> &Point {
        self.center_transform().corner()
    }

    fn locate(&self, x: &[Scalar]) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x).unwrap_or(false))
    }

    /// Membership in the open `c`-half-cell `C'`.
    pub fn in_half_cell(&self, x: &[Scalar]) -> bool {
        let piece = &self.pieces[self.center];
        self.cells[self.center].contains(x).unwrap_or(false)
            && piece.canonical().face().half_cell().is_ok_and(|h| h.contains(&piece.transform().apply(x)))
    }
}

impl Deformation for GluedRetraction {
    fn dim(&self) -> usize {
        self.cells[0].dim()
    }

    fn q(&self) -> &Scalar {
        &self.q
    }

    fn eval(&self, t: &Scalar, x: &[Scalar]) -> Result<Point> {
        if x.len() != self.dim() {
            return Err(Error::Arity { expected: self.dim(), got: x.len() });
        }
        check_time(t, &self.q)?;
        let i = self.locate(x).ok_or(Error::OutsideDomain)?;
        let piece = &self.pieces[i];
        let ti = if self.mutation == Mutation::NoClamp { t.clone() } else { min_scalar(t.clone(), piece.q().clone()) };
        piece.eval(&ti, x)
    }

    fn in_domain(&self, x: &[Scalar]) -> bool {
        self.locate(x).is_some()
    }

    fn in_target(&self, x: &[Scalar]) -> bool {
        self.in_half_cell(x)
    }

    fn sample_domain(&self, k: usize, mut rng: &mut dyn RngCore) -> Vec<Point> {
        (0..k)
            .filter_map(|_| {
                let i = rng.gen_range(0..self.cells.len());
                sample_points_with(&self.cells[i], 1, &mut rng).ok()?.pop()
            })
            .collect()
    }

    fn sample_target(&self, k: usize, mut rng: &mut dyn RngCore) -> Vec<Point> {
        let piece = &self.pieces[self.center];
        let Ok(half) = piece.canonical().face().half_cell() else {
            return Vec::new();
        };
        half.sample(k, &mut rng, false).iter().map(|z| piece.transform().invert(z)).collect()
    }

    fn fixing_point(&self, x: &[Scalar]) -> Option<Scalar> {
        let i = self.locate(x)?;
        self.pieces[i].fixing_point(x)
    }

    fn trajectory(&self, x: &[Scalar]) -> Option<Trajectory> {
        let i = self.locate(x)?;
        let piece = &self.pieces[i];
        let tr = piece.trajectory(x)?;
        Some(tr.iter().map(|f| f.hold_after(piece.q(), &max_scalar(self.q.clone(), piece.q().clone()))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::Carrier;
    use crate::scalar::{int, point, ratio};
    use crate::AffineMap;

    /// The band `{0 < x < 4, 0 < y < x/2 + 2}` with its lower edge and the
    /// origin.
    fn two_cell_star() -> Decomposition {
        let base = LinearCell::interval(Some(int(0)), Some(int(4))).unwrap();
        let band = LinearCell::band(&base, AffineMap::zero(1).into(), AffineMap::new(vec![ratio(1, 2)], int(2)).into()).unwrap();
        let edge = LinearCell::graph(&base, AffineMap::zero(1)).unwrap();
        let origin = LinearCell::graph(&LinearCell::point(int(0)), AffineMap::zero(1)).unwrap();
        Decomposition { n: 2, carrier: Carrier::All, special: true, cells: vec![origin, edge, band] }
    }

    #[test]
    fn c_retraction_of_an_interval() {
        let d = LinearCell::interval(Some(int(1)), Some(int(4))).unwrap();
        let h = CRetraction::towards(&d, &LinearCell::point(int(1)), &CornerLabel::from_bits(&[0])).unwrap();
        assert_eq!(h.q(), &int(3));
        for x in [int(1), int(2), ratio(7, 2), int(4)] {
            assert_eq!(h.eval(&int(0), &[x.clone()]).unwrap(), vec![int(1)]);
            assert_eq!(h.eval(&int(3), &[x.clone()]).unwrap(), vec![x.clone()]);
            assert_eq!(h.eval(&int(1), &[x.clone()]).unwrap(), vec![int(1) + min_scalar(int(1), x - int(1))]);
        }
    }

    #[test]
    fn glued_agrees_with_pieces() {
        let d = two_cell_star();
        let h = glue_star_retraction(&d, 0, &CornerLabel::from_bits(&[0, 0])).unwrap();
        assert_eq!(h.q(), &int(8));
        assert_eq!(h.eval(&int(1), &point(&[2, 1])).unwrap(), point(&[1, 1]));
        assert_eq!(h.eval(&int(1), &point(&[2, 0])).unwrap(), point(&[1, 0]));
        // The band's piece extends the edge's piece.
        let band = &h.pieces()[2];
        let edge = &h.pieces()[1];
        for x in [point(&[2, 0]), point(&[4, 0]), vec![ratio(1, 3), int(0)]] {
            for t in [int(0), int(1), ratio(5, 2), int(4)] {
                assert_eq!(band.eval(&t, &x).unwrap(), edge.eval(&t, &x).unwrap());
            }
        }
        assert!(matches!(h.eval(&int(1), &point(&[5, 0])), Err(Error::OutsideDomain)));
    }

    #[test]
    fn hypotheses_are_checked() {
        let mut d = two_cell_star();
        d.special = false;
        assert!(matches!(glue_star_retraction(&d, 0, &CornerLabel::from_bits(&[0, 0])), Err(Error::NotSpecial)));
        let d = two_cell_star();
        // The band is not in the closure of the edge.
        assert!(matches!(glue_star_retraction(&d, 2, &CornerLabel::from_bits(&[0, 0])), Err(Error::Hypothesis(_))));
        let mut d = two_cell_star();
        d.cells.push(LinearCell::band(&LinearCell::point(int(0)), AffineMap::zero(1).into(), crate::ExtAffine::PosInf).unwrap());
        assert!(matches!(glue_star_retraction(&d, 0, &CornerLabel::from_bits(&[0, 0])), Err(Error::Unbounded)));
    }

    #[test]
    fn pinched_wedge_has_no_coherent_labels() {
        // {0 ≤ y ≤ x, x < 1}: the band (0, x) is pinched at the origin, where
        // both its edges end.
        let base = LinearCell::interval(Some(int(0)), Some(int(1))).unwrap();
        let origin = LinearCell::graph(&LinearCell::point(int(0)), AffineMap::zero(1)).unwrap();
        let floor = LinearCell::graph(&base, AffineMap::zero(1)).unwrap();
        let ceiling = LinearCell::graph(&base, AffineMap::from_ints(&[1], 0)).unwrap();
        let band = LinearCell::band(&base, AffineMap::zero(1).into(), AffineMap::from_ints(&[1], 0).into()).unwrap();
        let corner = CornerLabel::zeros(2);
        let mut d = Decomposition { n: 2, carrier: Carrier::All, special: true, cells: vec![origin, floor, band, ceiling] };
        assert_eq!(CRetraction::labels_towards(&d.cells[2], &d.cells[0], &corner).unwrap().len(), 2);
        assert!(matches!(glue_star_retraction(&d, 0, &corner), Err(Error::Hypothesis(_))));
        // Either edge alone can be matched.
        d.cells.pop();
        let g = glue_star_retraction(&d, 0, &corner).unwrap();
        assert_eq!(g.pieces()[2].transform().label(), &CornerLabel::from_bits(&[0, 0]));
        d.cells.remove(1);
        d.cells.push(LinearCell::graph(&base, AffineMap::from_ints(&[1], 0)).unwrap());
        let g = glue_star_retraction(&d, 0, &corner).unwrap();
        assert_eq!(g.pieces()[1].transform().label(), &CornerLabel::from_bits(&[0, 1]));
    }

    #[test]
    fn common_corners_of_edge_and_band() {
        let d = two_cell_star();
        let shared = common_corner(&d.cells[1], &d.cells[2]).unwrap();
        let points: Vec<Point> = shared.iter().map(|s| s.point.clone()).collect();
        assert!(points.contains(&point(&[0, 0])));
        assert!(points.contains(&point(&[4, 0])));
        assert!(common_corner(&d.cells[2], &d.cells[1]).is_err());
    }
}
