//! Cylindrical construction shared by `decompose` and `refine_special`.
//!
//! Given a set `F` of affine maps on `Rⁿ`, the last coordinate is
//! eliminated: each map with a nonzero last coefficient contributes its root
//! `x_n = ρ(x_1, …, x_{n-1})`, the others pass down unchanged, and all
//! pairwise differences of roots join them. The base is decomposed
//! recursively; over each base cell the roots are uniformly ordered, so a
//! single witness point sorts them.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::cell::{LinearCell, Stage};
use crate::error::Result;
use crate::oracle::pick_between;
use crate::scalar::{AffineMap, ExtAffine, Point, Scalar};

use super::formula::Formula;
use super::{Carrier, Decomposition};

#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub cell: LinearCell,
    pub witness: Point,
}

/// Scales `f` so that its last nonzero coefficient is 1. Constant maps have
/// no sign changes and give `None`.
pub(crate) fn normalize(f: &AffineMap) -> Option<AffineMap> {
    let lead = f.coeffs().iter().rev().find(|c| !c.is_zero())?;
    if lead.is_one() {
        return Some(f.clone());
    }
    Some(f * &lead.recip())
}

fn split_last(f: &AffineMap) -> (Scalar, AffineMap) {
    let n = f.arity();
    let rest = AffineMap::new(f.coeffs()[..n - 1].to_vec(), f.constant_term().clone());
    (f.coeff(n - 1).clone(), rest)
}

/// Cells of `Rⁿ`, each carrying a witness point, on which every map of
/// `maps` has constant sign. Cells over one base cell are contiguous and in
/// increasing order of the last coordinate.
pub(crate) fn sign_invariant(maps: &BTreeSet<AffineMap>, n: usize) -> Vec<Piece> {
    debug_assert!(n >= 1);
    let mut roots = BTreeSet::new();
    let mut lower = BTreeSet::new();
    for f in maps {
        let (a, rest) = split_last(f);
        if a.is_zero() {
            lower.extend(normalize(&rest));
        } else {
            roots.insert(&rest * &(-a.recip()));
        }
    }
    let roots: Vec<AffineMap> = roots.into_iter().collect();
    let bases: Vec<(Vec<Stage>, Point)> = if n == 1 {
        vec![(Vec::new(), Vec::new())]
    } else {
        for (i, r) in roots.iter().enumerate() {
            for s in &roots[i + 1..] {
                lower.extend(normalize(&(r - s)));
            }
        }
        sign_invariant(&lower, n - 1)
            .into_iter()
            .map(|p| (p.cell.stages().to_vec(), p.witness))
            .collect()
    };
    let mut out = Vec::new();
    for (prefix, w) in &bases {
        stack(prefix, w, &roots, &mut out);
    }
    out
}

fn stack(prefix: &[Stage], w: &Point, roots: &[AffineMap], out: &mut Vec<Piece>) {
    let mut vals: Vec<(Scalar, &AffineMap)> = roots.iter().map(|r| (r.eval_prefix(w), r)).collect();
    // Stable sort; among roots equal on this base cell the first in map
    // order represents them all.
    vals.sort_by(|a, b| a.0.cmp(&b.0));
    vals.dedup_by(|later, earlier| later.0 == earlier.0);

    let piece = |stage: Stage, v: Scalar| {
        let mut stages = prefix.to_vec();
        stages.push(stage);
        let mut witness = w.clone();
        witness.push(v);
        Piece { cell: LinearCell::from_stages_unchecked(stages), witness }
    };
    let mut lo: Option<(&Scalar, &AffineMap)> = None;
    for (v, r) in &vals {
        let lo_map = lo.map_or(ExtAffine::NegInf, |(_, m)| ExtAffine::Finite(m.clone()));
        out.push(piece(Stage::Band(lo_map, ExtAffine::Finite((*r).clone())), pick_between(lo.map(|l| l.0), Some(v))));
        out.push(piece(Stage::Graph((*r).clone()), v.clone()));
        lo = Some((v, r));
    }
    let lo_map = lo.map_or(ExtAffine::NegInf, |(_, m)| ExtAffine::Finite(m.clone()));
    out.push(piece(Stage::Band(lo_map, ExtAffine::PosInf), pick_between(lo.map(|l| l.0), None)));
}

/// Merges runs of consecutive cells over the same base that `profile`
/// cannot tell apart. Only band-to-band runs merge, so the result is again a
/// list of linear cells.
fn merge_fibers<P: PartialEq>(pieces: Vec<Piece>, profile: impl Fn(&Point) -> P) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < pieces.len() {
        let n = pieces[start].cell.dim();
        let base = &pieces[start].cell.stages()[..n - 1];
        let mut end = start;
        while end + 1 < pieces.len() && &pieces[end + 1].cell.stages()[..n - 1] == base {
            end += 1;
        }
        merge_stack(&pieces[start..=end], &profile, &mut out);
        start = end + 1;
    }
    out
}

fn merge_stack<P: PartialEq>(stack: &[Piece], profile: &impl Fn(&Point) -> P, out: &mut Vec<Piece>) {
    let profiles: Vec<P> = stack.iter().map(|p| profile(&p.witness)).collect();
    let mut s = 0;
    while s < stack.len() {
        let mut e = s;
        while e + 1 < stack.len() && profiles[e + 1] == profiles[s] {
            e += 1;
        }
        let first = if stack[s].cell.last().is_band() { s } else { s + 1 };
        let last = if stack[e].cell.last().is_band() { e } else { e.saturating_sub(1) };
        if first < last {
            out.extend(stack[s..first].iter().cloned());
            let (Stage::Band(lo, _), Stage::Band(_, hi)) = (stack[first].cell.last(), stack[last].cell.last()) else {
                unreachable!("run ends are bands")
            };
            let n = stack[first].cell.dim();
            let mut stages = stack[first].cell.stages()[..n - 1].to_vec();
            stages.push(Stage::Band(lo.clone(), hi.clone()));
            out.push(Piece {
                cell: LinearCell::from_stages_unchecked(stages),
                witness: stack[first].witness.clone(),
            });
            out.extend(stack[last + 1..=e].iter().cloned());
        } else {
            out.extend(stack[s..=e].iter().cloned());
        }
        s = e + 1;
    }
}

/// A linear decomposition of `Rⁿ` partitioning each of `sets`.
///
/// Adjacent cells of a fiber that no set distinguishes are merged, so the
/// result is usually coarser than a special decomposition.
pub fn decompose(sets: &[Formula], n: usize) -> Result<Decomposition> {
    if n == 0 {
        return Err(crate::Error::Arity { expected: 1, got: 0 });
    }
    let mut atoms = Vec::new();
    for s in sets {
        s.check_arity(n)?;
        s.collect_atoms(&mut atoms);
    }
    let maps: BTreeSet<AffineMap> = atoms.iter().filter_map(normalize).collect();
    let pieces = sign_invariant(&maps, n);
    let pieces = merge_fibers(pieces, |w| sets.iter().map(|s| s.holds(w)).collect::<Vec<bool>>());
    Ok(Decomposition {
        n,
        carrier: Carrier::All,
        special: n == 1,
        cells: pieces.into_iter().map(|p| p.cell).collect(),
    })
}

/// Every map in the description of the cells, lifted to `Rⁿ` as
/// `x_k − f(x_1, …, x_{k-1})`.
fn stage_maps(cells: &[LinearCell], n: usize) -> BTreeSet<AffineMap> {
    let mut maps = BTreeSet::new();
    for cell in cells {
        for (k, stage) in cell.stages().iter().enumerate() {
            let xk = AffineMap::coordinate(n, k);
            let ms: Vec<&AffineMap> = match stage {
                Stage::Graph(f) => vec![f],
                Stage::Band(lo, hi) => lo.finite().into_iter().chain(hi.finite()).collect(),
            };
            maps.extend(ms.into_iter().filter_map(|f| normalize(&(&xk - &f.lift(n)))));
        }
    }
    maps
}

/// A special linear decomposition refining `d`.
///
/// Over every base cell all collected maps are stacked, so each cell of `d`
/// is a union of output cells; cells outside the carrier are dropped.
pub fn refine_special(d: &Decomposition) -> Result<Decomposition> {
    d.check_shape()?;
    if d.n == 1 {
        return Ok(Decomposition { special: true, ..d.clone() });
    }
    let pieces = sign_invariant(&stage_maps(&d.cells, d.n), d.n);
    let cells = pieces
        .into_iter()
        .filter(|p| d.cells.iter().any(|c| c.contains(&p.witness).unwrap_or(false)))
        .map(|p| p.cell)
        .collect();
    Ok(Decomposition { n: d.n, carrier: d.carrier.clone(), special: true, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, point};

    #[test]
    fn one_dimensional_sort() {
        let d = decompose(&[Formula::ge(AffineMap::from_ints(&[1], 0))], 1).unwrap();
        let expected = vec![
            LinearCell::interval(None, Some(int(0))).unwrap(),
            LinearCell::point(int(0)),
            LinearCell::interval(Some(int(0)), None).unwrap(),
        ];
        assert_eq!(d.cells, expected);
        assert!(d.special);
    }

    #[test]
    fn no_sets_gives_whole_space() {
        let d = decompose(&[], 3).unwrap();
        assert_eq!(d.cells, vec![LinearCell::whole(3)]);
    }

    #[test]
    fn merging_keeps_sets_unions_of_cells() {
        // x >= 0 or x >= 1: the point 1 is invisible and (0, +inf) merges.
        let s = Formula::or(vec![
            Formula::ge(AffineMap::from_ints(&[1], 0)),
            Formula::ge(AffineMap::from_ints(&[1], -1)),
        ]);
        let d = decompose(&[s.clone()], 1).unwrap();
        assert_eq!(d.cells.len(), 3);
        assert_eq!(d.cells[2], LinearCell::interval(Some(int(0)), None).unwrap());
        // [0, 2] keeps its end points.
        let s = Formula::and(vec![
            Formula::ge(AffineMap::from_ints(&[1], 0)),
            Formula::ge(AffineMap::from_ints(&[-1], 2)),
        ]);
        assert_eq!(decompose(&[s], 1).unwrap().cells.len(), 5);
        let x_gt_1 = Formula::gt(AffineMap::from_ints(&[1], -1));
        let d = decompose(&[x_gt_1.clone(), Formula::not(x_gt_1)], 1).unwrap();
        assert_eq!(d.cells.len(), 3);
    }

    #[test]
    fn witnesses_lie_in_their_cells() {
        let maps: BTreeSet<AffineMap> = [
            AffineMap::from_ints(&[1, -1], 0),
            AffineMap::from_ints(&[0, 1], -2),
            AffineMap::from_ints(&[1, 1], 0),
        ]
        .iter()
        .filter_map(normalize)
        .collect();
        let pieces = sign_invariant(&maps, 2);
        for p in &pieces {
            assert!(p.cell.contains(&p.witness).unwrap(), "{} at {:?}", p.cell, p.witness);
        }
        // Three lines meeting pairwise at distinct points: base has 3
        // points, hence 7 base cells.
        let bases: std::collections::HashSet<_> = pieces.iter().map(|p| p.cell.projection(1).unwrap().stages().to_vec()).collect();
        assert_eq!(bases.len(), 7);
        assert!(pieces.iter().any(|p| p.witness == point(&[0, 0])));
    }

    #[test]
    fn normalize_scales_last_coefficient() {
        assert_eq!(normalize(&AffineMap::from_ints(&[2, -4], 6)), Some(AffineMap::new(vec![crate::scalar::ratio(-1, 2), int(1)], crate::scalar::ratio(-3, 2))));
        assert_eq!(normalize(&AffineMap::from_ints(&[0, 0], 6)), None);
    }
}
