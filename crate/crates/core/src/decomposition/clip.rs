use crate::cell::{LinearCell, Stage};
use crate::error::{Error, Result};
use crate::oracle::{inf_over_system, sup_over_system, Constraint, LinearSystem};
use crate::scalar::{int, max_scalar, min_scalar, AffineMap, ExtAffine, Scalar};

use super::{base_projections, Decomposition, Formula};

/// An open box `(a₁, b₁) × … × (aₙ, bₙ)`.
pub type OpenBox = Vec<(Scalar, Scalar)>;

/// Enlarges `b1` to a box `B` such that the traces `B ∩ D` of the cells form
/// a special decomposition of `B ∩ Y` whenever `d` is special.
///
/// The last side of `B` is pushed one unit past every finite cell-map over
/// the closure of the clipped base box, so infinite band bounds can be
/// replaced by constants. Cells missing `B` are dropped.
pub fn clip_to_box(d: &Decomposition, b1: &[(Scalar, Scalar)]) -> Result<(OpenBox, Decomposition)> {
    d.check_shape()?;
    if b1.len() != d.n {
        return Err(Error::Arity { expected: d.n, got: b1.len() });
    }
    if b1.iter().any(|(a, b)| a >= b) {
        return Err(Error::InvalidCell("degenerate box side".into()));
    }
    let (bbox, clipped) = clip_cells(&d.cells, b1)?;
    let cells = clipped.into_iter().flatten().collect();
    let carrier = d.carrier.and(Formula::open_box(&bbox));
    Ok((bbox, Decomposition { n: d.n, carrier, special: d.special, cells }))
}

fn clip_cells(cells: &[LinearCell], b1: &[(Scalar, Scalar)]) -> Result<(OpenBox, Vec<Option<LinearCell>>)> {
    let n = b1.len();
    if cells.is_empty() {
        return Ok((b1.to_vec(), Vec::new()));
    }
    if n == 1 {
        let (a, b) = &b1[0];
        let out = cells.iter().map(|c| clip_line(c, a, b)).collect();
        return Ok((b1.to_vec(), out));
    }

    let (bases, idx) = base_projections(cells);
    let (mut bbox, clipped_bases) = clip_cells(&bases, &b1[..n - 1])?;

    let closed_a = LinearSystem::from_constraints(
        n - 1,
        bbox.iter()
            .enumerate()
            .flat_map(|(i, (a, b))| {
                let x = AffineMap::coordinate(n - 1, i);
                [
                    Constraint::le(&AffineMap::constant(n - 1, a.clone()) - &x),
                    Constraint::le(&x - &AffineMap::constant(n - 1, b.clone())),
                ]
            })
            .collect(),
    );
    let (mut lo, mut hi) = b1[n - 1].clone();
    for c in cells {
        let maps: Vec<&AffineMap> = match c.last() {
            Stage::Graph(f) => vec![f],
            Stage::Band(l, h) => l.finite().into_iter().chain(h.finite()).collect(),
        };
        for f in maps {
            lo = min_scalar(lo, inf_over_system(f, &closed_a)?);
            hi = max_scalar(hi, sup_over_system(f, &closed_a)?);
        }
    }
    let lo = lo - int(1);
    let hi = hi + int(1);

    let out = cells
        .iter()
        .zip(&idx)
        .map(|(c, &bi)| {
            let base = clipped_bases[bi].as_ref()?;
            let stage = match c.last() {
                Stage::Graph(f) => Stage::Graph(f.clone()),
                Stage::Band(l, h) => Stage::Band(
                    finite_or(l, &lo, n - 1),
                    finite_or(h, &hi, n - 1),
                ),
            };
            let mut stages = base.stages().to_vec();
            stages.push(stage);
            Some(LinearCell::from_stages_unchecked(stages))
        })
        .collect();
    bbox.push((lo, hi));
    Ok((bbox, out))
}

fn finite_or(bound: &ExtAffine, fallback: &Scalar, arity: usize) -> ExtAffine {
    match bound {
        ExtAffine::Finite(f) => ExtAffine::Finite(f.clone()),
        _ => ExtAffine::Finite(AffineMap::constant(arity, fallback.clone())),
    }
}

fn clip_line(c: &LinearCell, a: &Scalar, b: &Scalar) -> Option<LinearCell> {
    match c.last() {
        Stage::Graph(f) => {
            let v = f.constant_term();
            (a < v && v < b).then(|| c.clone())
        }
        Stage::Band(l, h) => {
            let lo = l.finite().map_or(a.clone(), |f| max_scalar(a.clone(), f.constant_term().clone()));
            let hi = h.finite().map_or(b.clone(), |f| min_scalar(b.clone(), f.constant_term().clone()));
            LinearCell::interval(Some(lo), Some(hi)).ok()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{decompose, refine_special, validate_special};
    use crate::scalar::point;

    #[test]
    fn line_keeps_given_box() {
        let d = decompose(&[Formula::ge(AffineMap::from_ints(&[1], 0))], 1).unwrap();
        let (b, c) = clip_to_box(&d, &[(int(-1), int(1))]).unwrap();
        assert_eq!(b, vec![(int(-1), int(1))]);
        assert_eq!(
            c.cells,
            vec![
                LinearCell::interval(Some(int(-1)), Some(int(0))).unwrap(),
                LinearCell::point(int(0)),
                LinearCell::interval(Some(int(0)), Some(int(1))).unwrap(),
            ]
        );
        assert!(c.carrier.contains(&point(&[0])));
        assert!(!c.carrier.contains(&point(&[1])));
    }

    #[test]
    fn unbounded_band_gets_constant_cap() {
        // y >= x in R^2; the band above the diagonal has +inf on top.
        let d = refine_special(&decompose(&[Formula::ge(AffineMap::from_ints(&[-1, 1], 0))], 2).unwrap()).unwrap();
        let (b, c) = clip_to_box(&d, &[(int(-1), int(1)), (int(0), int(1))]).unwrap();
        assert_eq!(b[0], (int(-1), int(1)));
        // The diagonal ranges over [-1, 1] on the base box, so the second
        // side becomes (-2, 2).
        assert_eq!(b[1], (int(-2), int(2)));
        assert!(c.cells.iter().all(LinearCell::is_bounded));
        assert_eq!(c.cells.len(), 3);
        assert!(validate_special(&c).is_ok());
    }

    #[test]
    fn bounded_cells_are_unchanged() {
        let base = LinearCell::interval(Some(int(0)), Some(int(1))).unwrap();
        let cell = LinearCell::graph(&base, AffineMap::from_ints(&[1], 0)).unwrap();
        let d = Decomposition { n: 2, carrier: super::super::Carrier::All, special: true, cells: vec![cell.clone()] };
        let (_, c) = clip_to_box(&d, &[(int(-5), int(5)), (int(-5), int(5))]).unwrap();
        assert_eq!(c.cells, vec![cell]);
    }
}
