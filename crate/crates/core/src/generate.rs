//! Seeded random instances for tests and benchmarks.

use rand::Rng;

use crate::cell::{CornerLabel, LinearCell, SigmaLabel};
use crate::decomposition::{clip_to_box, decompose, refine_special, Decomposition, Formula};
use crate::error::{Error, Result};
use crate::oracle::sample_points_with;
use crate::retraction::{glue_star_retraction, CornerTransform, PlPath};
use crate::scalar::{int, AffineMap, Point};

/// An atom `f ≥ 0`, `f > 0` or `f = 0` with small integer coefficients.
pub fn random_atom(n: usize, rng: &mut impl Rng) -> Formula {
    let mut coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    if coeffs.iter().all(|c| *c == 0) {
        let i = rng.gen_range(0..n);
        coeffs[i] = if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    let f = AffineMap::from_ints(&coeffs, rng.gen_range(-4..=4));
    match rng.gen_range(0..10) {
        0 => Formula::eq(f),
        1..=5 => Formula::ge(f),
        _ => Formula::gt(f),
    }
}

/// A random boolean combination of exactly `atoms` atoms.
pub fn random_formula(n: usize, atoms: usize, rng: &mut impl Rng) -> Formula {
    if atoms <= 1 {
        let a = random_atom(n, rng);
        return if rng.gen_range(0..4) == 0 { Formula::not(a) } else { a };
    }
    let left = rng.gen_range(1..atoms);
    let (l, r) = (random_formula(n, left, rng), random_formula(n, atoms - left, rng));
    let f = if rng.gen_bool(0.5) { Formula::and(vec![l, r]) } else { Formula::or(vec![l, r]) };
    if rng.gen_range(0..6) == 0 {
        Formula::not(f)
    } else {
        f
    }
}

/// One or two sets with `1..=max_atoms` atoms between them.
pub fn random_sets(n: usize, max_atoms: usize, rng: &mut impl Rng) -> Vec<Formula> {
    let total = rng.gen_range(1..=max_atoms.max(1));
    if total >= 2 && rng.gen_bool(0.5) {
        let first = rng.gen_range(1..total);
        vec![random_formula(n, first, rng), random_formula(n, total - first, rng)]
    } else {
        vec![random_formula(n, total, rng)]
    }
}

/// A decomposition of `Rⁿ` adapted to random sets and its special
/// refinement.
pub fn random_special(n: usize, max_atoms: usize, rng: &mut impl Rng) -> Result<(Vec<Formula>, Decomposition, Decomposition)> {
    let sets = random_sets(n, max_atoms, rng);
    let coarse = decompose(&sets, n)?;
    let fine = refine_special(&coarse)?;
    Ok((sets, coarse, fine))
}

/// A bounded star of a special decomposition together with its center and a
/// corner of the center.
#[derive(Clone, Debug)]
pub struct StarInstance {
    pub decomposition: Decomposition,
    pub center: usize,
    pub corner: CornerLabel,
    /// Stars drawn before this one that met the closure hypothesis but had no
    /// coherent corner labels.
    pub rejected: usize,
}

impl StarInstance {
    pub fn center_cell(&self) -> &LinearCell {
        &self.decomposition.cells[self.center]
    }
}

/// A random star whose cells can be glued: refines random sets, clips to a
/// box around the origin and takes the star of a random cell, redrawing while
/// no coherent corner labels exist.
pub fn random_star_instance(n: usize, max_atoms: usize, rng: &mut impl Rng) -> Result<StarInstance> {
    let mut rejected = 0;
    loop {
        let inst = random_star_candidate(n, max_atoms, rng)?;
        match glue_star_retraction(&inst.decomposition, inst.center, &inst.corner) {
            Ok(_) => return Ok(StarInstance { rejected, ..inst }),
            Err(Error::Hypothesis(_)) if rejected < 1000 => rejected += 1,
            Err(e) => return Err(e),
        }
    }
}

/// A random star meeting the closure hypothesis, without the gluing check.
/// Points are chosen as centers three times out of four, since their stars
/// are the largest.
pub fn random_star_candidate(n: usize, max_atoms: usize, rng: &mut impl Rng) -> Result<StarInstance> {
    let (_, _, fine) = random_special(n, max_atoms, rng)?;
    let side = int(rng.gen_range(2..=4));
    let b1: Vec<_> = (0..n).map(|_| (-side.clone(), side.clone())).collect();
    let (_, clipped) = clip_to_box(&fine, &b1)?;
    let low = clipped.cells.iter().map(LinearCell::cell_dim).min().expect("a box is nonempty");
    let pool: Vec<usize> = if rng.gen_range(0..4) < 3 {
        (0..clipped.cells.len()).filter(|&i| clipped.cells[i].cell_dim() == low).collect()
    } else {
        (0..clipped.cells.len()).collect()
    };
    let c = pool[rng.gen_range(0..pool.len())];
    let members = clipped.star(c)?;
    let decomposition = clipped.select(&members)?;
    let center = members.iter().position(|&i| i == c).expect("a cell is in its own star");
    let labels = decomposition.cells[center].index().below();
    let corner = labels[rng.gen_range(0..labels.len())].clone();
    Ok(StarInstance { decomposition, center, corner, rejected: 0 })
}

/// A canonical cell and a nonempty face of it, obtained by moving a random
/// bounded cell to a random corner.
pub fn random_face_pair(n: usize, max_atoms: usize, rng: &mut impl Rng) -> Result<(LinearCell, SigmaLabel)> {
    for _ in 0..64 {
        let inst = random_star_candidate(n, max_atoms, rng)?;
        let cells = &inst.decomposition.cells;
        let cell = &cells[rng.gen_range(0..cells.len())];
        let labels = cell.index().below();
        let t = CornerTransform::new(cell, &labels[rng.gen_range(0..labels.len())])?;
        let d = t.image().clone();
        let sigmas = d.index().below();
        let sigma = sigmas[rng.gen_range(0..sigmas.len())].clone();
        if d.sigma_face(&sigma).is_ok() {
            return Ok((d, sigma));
        }
    }
    Err(Error::EmptyCell)
}

/// A loop through the center of a star that makes up to three excursions
/// into star cells: `c₀ → d₁ → c₁ → … → c₀`. Segments between a point of
/// the center and a point of a cell whose closure contains it stay in that
/// cell except at the end.
pub fn random_loop(inst: &StarInstance, max_vertices: usize, rng: &mut impl Rng) -> Result<PlPath> {
    let cells = &inst.decomposition.cells;
    let center = inst.center_cell();
    let excursions = rng.gen_range(1..=((max_vertices.max(3) - 1) / 2));
    let start = pick(center, rng)?;
    let mut vertices = vec![start.clone()];
    for e in 0..excursions {
        let d = &cells[rng.gen_range(0..cells.len())];
        vertices.push(pick(d, rng)?);
        vertices.push(if e + 1 == excursions { start.clone() } else { pick(center, rng)? });
    }
    let mut breakpoints = vec![int(0)];
    for _ in 1..vertices.len() {
        let step = int(rng.gen_range(1..=3));
        breakpoints.push(breakpoints.last().expect("nonempty") + step);
    }
    PlPath::new(breakpoints, vertices)
}

fn pick(cell: &LinearCell, rng: &mut impl Rng) -> Result<Point> {
    Ok(sample_points_with(cell, 1, rng)?.pop().expect("one sample"))
}
