use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cell::{CornerLabel, LinearCell};
use crate::decomposition::{clip_to_box, Decomposition, OpenBox};
use crate::error::{Error, Result};
use crate::oracle::{is_feasible, range_over, Constraint, LinearSystem};
use crate::scalar::{int, max_scalar, min_scalar, serde_point, serde_points, AffineMap, Point, Scalar};

use super::contraction::{contract, Contraction};
use super::Deformation;

/// A piecewise-linear path `γ: [0, p] → Rⁿ` through `vertices`, reached at
/// the times in `breakpoints`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlPath {
    #[serde(with = "serde_point")]
    pub breakpoints: Vec<Scalar>,
    #[serde(with = "serde_points")]
    pub vertices: Vec<Point>,
}

impl PlPath {
    pub fn new(breakpoints: Vec<Scalar>, vertices: Vec<Point>) -> Result<Self> {
        let path = Self { breakpoints, vertices };
        path.validate()?;
        Ok(path)
    }

    /// Vertices at the times `0, 1, …, k`.
    pub fn uniform(vertices: Vec<Point>) -> Result<Self> {
        let breakpoints = (0..vertices.len()).map(|i| int(i as i64)).collect();
        Self::new(breakpoints, vertices)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() || self.vertices.len() != self.breakpoints.len() {
            return Err(Error::Parse("a path needs one breakpoint per vertex".into()));
        }
        if !self.breakpoints[0].is_zero() {
            return Err(Error::Parse("a path starts at time 0".into()));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse("path breakpoints must increase".into()));
        }
        let n = self.vertices[0].len();
        if let Some(v) = self.vertices.iter().find(|v| v.len() != n) {
            return Err(Error::Arity { expected: n, got: v.len() });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn length(&self) -> &Scalar {
        self.breakpoints.last().expect("validated")
    }

    pub fn is_loop(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    pub fn eval(&self, s: &Scalar) -> Result<Point> {
        if *s < Scalar::zero() || s > self.length() {
            return Err(Error::TimeOutOfRange { t: s.to_string(), q: self.length().to_string() });
        }
        let i = self.breakpoints.partition_point(|b| b <= s);
        if i == self.breakpoints.len() {
            return Ok(self.vertices[i - 1].clone());
        }
        let (s0, s1) = (&self.breakpoints[i - 1], &self.breakpoints[i]);
        let r = (s - s0) / (s1 - s0);
        let (a, b) = (&self.vertices[i - 1], &self.vertices[i]);
        Ok(a.iter().zip(b).map(|(x, y)| x + (y - x) * &r).collect())
    }

    /// Whether every point of the path lies in one of `cells`. Each segment
    /// meets each cell in an interval of parameters; the path is covered iff
    /// every end of those intervals and every midpoint between consecutive
    /// ends is.
    pub fn inside(&self, cells: &[LinearCell]) -> bool {
        let covered = |x: &[Scalar]| cells.iter().any(|c| c.contains(x).unwrap_or(false));
        if !self.vertices.iter().all(|v| covered(v)) {
            return false;
        }
        self.vertices.windows(2).all(|w| segment_inside(&w[0], &w[1], cells, &covered))
    }
}

fn segment_inside(a: &[Scalar], b: &[Scalar], cells: &[LinearCell], covered: &impl Fn(&[Scalar]) -> bool) -> bool {
    let along: Vec<AffineMap> = a.iter().zip(b).map(|(x, y)| AffineMap::new(vec![y - x], x.clone())).collect();
    let s = AffineMap::coordinate(1, 0);
    let unit = [Constraint::le(-&s), Constraint::le(&s - &AffineMap::constant(1, int(1)))];
    let mut ends = vec![Scalar::zero(), int(1)];
    for c in cells {
        let mut sys = LinearSystem::from_constraints(1, unit.to_vec());
        for con in c.system().constraints() {
            sys.push(Constraint::new(con.f.compose(&along), con.rel));
        }
        if let Some(iv) = range_over(&s, &sys) {
            ends.extend(iv.lo.map(|l| l.value));
            ends.extend(iv.hi.map(|h| h.value));
        }
    }
    ends.retain(|e| *e >= Scalar::zero() && *e <= int(1));
    ends.sort();
    ends.dedup();
    let at = |r: &Scalar| -> Point { along.iter().map(|f| f.eval_prefix(std::slice::from_ref(r))).collect() };
    ends.iter().all(|e| covered(&at(e))) && ends.windows(2).all(|w| covered(&at(&((&w[0] + &w[1]) / int(2)))))
}

/// `F(t, s) = K(t, γ(s))`, where `K` contracts the decomposition clipped to a
/// box around the loop.
#[derive(Clone, Debug)]
pub struct LoopHomotopy {
    path: PlPath,
    bbox: OpenBox,
    clipped: Decomposition,
    contraction: Contraction,
}

/// A homotopy from a constant loop to `path`, inside the union of the cells
/// of `d` clipped to a box around the loop. `center` and `corner` choose the
/// cell and corner the contraction goes through; every cell's closure must
/// meet the center.
pub fn loop_homotopy(d: &Decomposition, center: usize, corner: &CornerLabel, path: &PlPath) -> Result<LoopHomotopy> {
    d.check_shape()?;
    path.validate()?;
    if path.dim() != d.n {
        return Err(Error::Arity { expected: d.n, got: path.dim() });
    }
    if !path.is_loop() {
        return Err(Error::Hypothesis("the path is not a loop".into()));
    }
    if !path.inside(&d.cells) {
        return Err(Error::Hypothesis("the loop leaves the carrier".into()));
    }
    if !d.special {
        return Err(Error::NotSpecial);
    }
    let c_cell = d.cell(center)?;
    if let Some(i) = d.cells.iter().position(|cell| !c_cell.meets_closure_of(cell)) {
        return Err(Error::Hypothesis(format!("the closure of cell {i} misses the center cell {center}")));
    }
    let witness = is_feasible(&c_cell.system()).ok_or(Error::EmptyCell)?;
    let b1: OpenBox = (0..d.n)
        .map(|k| {
            let coords = path.vertices.iter().map(|v| &v[k]).chain(std::iter::once(&witness[k]));
            let lo = coords.clone().cloned().reduce(min_scalar).expect("nonempty");
            let hi = coords.cloned().reduce(max_scalar).expect("nonempty");
            (lo - int(1), hi + int(1))
        })
        .collect();
    let (bbox, clipped) = clip_to_box(d, &b1)?;
    let new_center = clipped.find_cell(&witness).ok_or(Error::EmptyCell)?;
    let contraction = contract(&clipped, new_center, corner)?;
    Ok(LoopHomotopy { path: path.clone(), bbox, clipped, contraction })
}

impl LoopHomotopy {
    pub fn q(&self) -> &Scalar {
        self.contraction.q()
    }

    pub fn p(&self) -> &Scalar {
        self.path.length()
    }

    pub fn path(&self) -> &PlPath {
        &self.path
    }

    pub fn bbox(&self) -> &OpenBox {
        &self.bbox
    }

    pub fn clipped(&self) -> &Decomposition {
        &self.clipped
    }

    pub fn contraction(&self) -> &Contraction {
        &self.contraction
    }

    pub fn eval(&self, t: &Scalar, s: &Scalar) -> Result<Point> {
        self.contraction.eval(t, &self.path.eval(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{decompose, refine_special, Formula};
    use crate::scalar::{point, ratio};

    fn plane_split() -> Decomposition {
        // x >= 0 in R^2: a special decomposition of the whole plane.
        refine_special(&decompose(&[Formula::ge(AffineMap::from_ints(&[1, 0], 0))], 2).unwrap()).unwrap()
    }

    #[test]
    fn path_evaluation() {
        let p = PlPath::uniform(vec![point(&[0, 0]), point(&[2, 0]), point(&[0, 0])]).unwrap();
        assert!(p.is_loop());
        assert_eq!(p.eval(&ratio(1, 2)).unwrap(), point(&[1, 0]));
        assert_eq!(p.eval(&int(2)).unwrap(), point(&[0, 0]));
        assert!(PlPath::new(vec![int(1)], vec![point(&[0])]).is_err());
    }

    #[test]
    fn segments_crossing_a_line() {
        let d = plane_split();
        let p = PlPath::uniform(vec![point(&[-1, 0]), point(&[1, 0]), point(&[-1, 0])]).unwrap();
        assert!(p.inside(&d.cells));
        let half: Vec<LinearCell> = d.cells.iter().filter(|c| !c.contains(&point(&[0, 0])).unwrap()).cloned().collect();
        assert!(!p.inside(&half));
    }

    #[test]
    fn homotopy_on_the_plane() {
        let d = plane_split();
        // The line x = 0 is in the closure of both half-planes.
        let center = d.find_cell(&point(&[0, 0])).unwrap();
        let corner = CornerLabel::zeros(2);
        let p = PlPath::uniform(vec![point(&[-1, 1]), point(&[1, 2]), point(&[0, -1]), point(&[-1, 1])]).unwrap();
        let h = loop_homotopy(&d, center, &corner, &p).unwrap();
        let start = h.eval(&int(0), &int(0)).unwrap();
        for j in 0..=6 {
            let s = ratio(j, 2);
            assert_eq!(h.eval(&int(0), &s).unwrap(), start);
            assert_eq!(h.eval(h.q(), &s).unwrap(), p.eval(&s).unwrap());
        }
        let open = PlPath::uniform(vec![point(&[-1, 1]), point(&[1, 2])]).unwrap();
        assert!(matches!(loop_homotopy(&d, center, &corner, &open), Err(Error::Hypothesis(_))));
    }
}
