//! Validators. The clauses of the special condition, the frontier property
//! and disjointness are decided exactly by feasibility queries; coverage of
//! the carrier is checked on sampled points.

use std::collections::{BTreeSet, HashMap};

use num_traits::Signed;
use rand::Rng;
use serde::Serialize;

use crate::cell::{LinearCell, Stage};
use crate::oracle::{self, feasible, is_feasible, Constraint, LinearSystem};
use crate::scalar::{int, AffineMap, Order, Point};

use super::{base_projections, cell_vs_set, Carrier, Decomposition};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialViolation {
    /// Which clause of the definition fails: 1, 2 or 3.
    pub clause: u8,
    /// Ambient dimension of the level where it was found.
    pub level: usize,
    /// Cell indices at that level (base cells for clause 2).
    pub cells: Vec<usize>,
    #[serde(with = "crate::scalar::serde_opt_point")]
    pub witness: Option<Point>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SpecialReport {
    /// Number of exact queries made.
    pub checks: usize,
    pub violations: Vec<SpecialViolation>,
}

impl SpecialReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The distinct projections of a list of cells onto each `Rᵏ`. A cell lies
/// over each of its projections, so two cells whose projections miss each
/// other are disjoint; pair queries try that first at the lowest level where
/// the projections differ.
struct Projections {
    /// `ids[i][k]`: the projection of cell `i` onto `R^(k+1)`.
    ids: Vec<Vec<usize>>,
    cells: Vec<LinearCell>,
    apart: HashMap<(usize, usize, bool), bool>,
}

impl Projections {
    fn new<'a>(cells: impl IntoIterator<Item = &'a LinearCell>) -> Self {
        let mut index: HashMap<LinearCell, usize> = HashMap::new();
        let mut distinct = Vec::new();
        let ids = cells
            .into_iter()
            .map(|c| {
                (1..=c.dim())
                    .map(|m| {
                        let p = c.projection(m).expect("1 ≤ m ≤ dim");
                        *index.entry(p.clone()).or_insert_with(|| {
                            distinct.push(p);
                            distinct.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        Self { ids, cells: distinct, apart: HashMap::new() }
    }

    /// Whether cell `a` misses cell `b`, or its closure when `closure` is
    /// set, already at the first level where their projections differ.
    fn apart(&mut self, a: usize, b: usize, closure: bool) -> bool {
        let (ia, ib) = (&self.ids[a], &self.ids[b]);
        let Some(k) = (0..ia.len().min(ib.len())).find(|&k| ia[k] != ib[k]) else { return false };
        let (pa, pb) = (ia[k], ib[k]);
        let cells = &self.cells;
        *self.apart.entry((pa, pb, closure)).or_insert_with(|| {
            let other = if closure { cells[pb].closure_system() } else { cells[pb].system() };
            !feasible(&cells[pa].system().and(&other))
        })
    }
}

/// Decides the three clauses of the special condition exactly.
pub fn validate_special(d: &Decomposition) -> SpecialReport {
    let mut report = SpecialReport::default();
    validate_level(&d.cells, &mut report);
    report
}

fn validate_level(cells: &[LinearCell], r: &mut SpecialReport) {
    let Some(n) = cells.first().map(LinearCell::dim) else { return };
    if n == 1 {
        return;
    }
    let (bases, idx) = base_projections(cells);

    let mut proj = Projections::new(&bases);
    for i in 0..bases.len() {
        for j in i + 1..bases.len() {
            r.checks += 1;
            if proj.apart(i, j, false) {
                continue;
            }
            if let Some(w) = is_feasible(&bases[i].system().and(&bases[j].system())) {
                r.violations.push(SpecialViolation {
                    clause: 1,
                    level: n - 1,
                    cells: vec![i, j],
                    witness: Some(w),
                    detail: "base projections overlap".into(),
                });
            }
        }
    }
    validate_level(&bases, r);

    let graphs: BTreeSet<&AffineMap> = cells
        .iter()
        .filter_map(|c| match c.last() {
            Stage::Graph(f) => Some(f),
            Stage::Band(..) => None,
        })
        .collect();
    let graphs: Vec<&AffineMap> = graphs.into_iter().collect();
    for (vi, v) in bases.iter().enumerate() {
        for (a, f) in graphs.iter().enumerate() {
            for g in &graphs[a + 1..] {
                r.checks += 1;
                let order = oracle::compare_on_cell(&(*f).clone().into(), &(*g).clone().into(), v);
                if !matches!(order, Ok(Order::Less | Order::Equal | Order::Greater)) {
                    let diff = *f - *g;
                    let witness = is_feasible(&v.system().with(Constraint::lt(diff)));
                    r.violations.push(SpecialViolation {
                        clause: 2,
                        level: n,
                        cells: vec![vi],
                        witness,
                        detail: format!("{f} and {g} are not uniformly ordered over base cell {vi}"),
                    });
                }
            }
        }
    }

    let mut meets: HashMap<(usize, usize), bool> = HashMap::new();
    let closures: Vec<LinearSystem> = bases.iter().map(LinearCell::closure_system).collect();
    for (a, ca) in cells.iter().enumerate() {
        let Stage::Graph(h) = ca.last() else { continue };
        for (b, cb) in cells.iter().enumerate() {
            let Stage::Band(lo, hi) = cb.last() else { continue };
            let (s, t) = (idx[a], idx[b]);
            let key = (s.min(t), s.max(t));
            let touching = *meets.entry(key).or_insert_with(|| feasible(&closures[s].and(&closures[t])));
            if !touching {
                continue;
            }
            r.checks += 1;
            let mut sys = closures[s].and(&closures[t]);
            if let Some(f) = lo.finite() {
                sys.push(Constraint::lt(f - h));
            }
            if let Some(g) = hi.finite() {
                sys.push(Constraint::lt(h - g));
            }
            if let Some(w) = is_feasible(&sys) {
                r.violations.push(SpecialViolation {
                    clause: 3,
                    level: n,
                    cells: vec![a, b],
                    witness: Some(w),
                    detail: format!("graph of {h} passes strictly inside band ({lo}, {hi}) over a shared closure point"),
                });
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrontierViolation {
    pub a: usize,
    pub b: usize,
    /// A point of cell `a` outside the closure of cell `b`.
    #[serde(with = "crate::scalar::serde_point")]
    pub witness: Point,
    /// Found by the exact query rather than by sampling.
    pub exact: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FrontierReport {
    pub pairs: usize,
    /// Ordered pairs `(a, b)` with `a ∩ cl(b) ≠ ∅`.
    pub meeting: usize,
    pub violations: Vec<FrontierViolation>,
}

impl FrontierReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every ordered pair of cells with `A ∩ cl(B) ≠ ∅`, checks `A ⊆ cl(B)`
/// exactly and on `samples` sampled points of `A`.
pub fn check_frontier(d: &Decomposition, samples: usize, rng: &mut impl Rng) -> FrontierReport {
    let mut report = FrontierReport::default();
    let systems: Vec<LinearSystem> = d.cells.iter().map(LinearCell::system).collect();
    let closures: Vec<LinearSystem> = d.cells.iter().map(LinearCell::closure_system).collect();
    let mut proj = Projections::new(&d.cells);
    for a in 0..d.cells.len() {
        for b in 0..d.cells.len() {
            if a == b {
                continue;
            }
            report.pairs += 1;
            if proj.apart(a, b, true) || !feasible(&systems[a].and(&closures[b])) {
                continue;
            }
            report.meeting += 1;
            let escape = closures[b]
                .constraints()
                .iter()
                .flat_map(Constraint::negation)
                .find_map(|neg| is_feasible(&systems[a].clone().with(neg)));
            if let Some(w) = escape {
                report.violations.push(FrontierViolation { a, b, witness: w, exact: true });
            }
            let pts = d.cells[a].sample_points(samples, rng).unwrap_or_default();
            if let Some(w) = pts.into_iter().find(|p| !d.cells[b].closure_contains(p).unwrap_or(false)) {
                report.violations.push(FrontierViolation { a, b, witness: w, exact: false });
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    /// Points of the carrier that were tested.
    pub samples: usize,
    pub overlaps: Vec<(usize, usize)>,
    pub outside_carrier: Vec<usize>,
    #[serde(with = "crate::scalar::serde_points")]
    pub uncovered: Vec<Point>,
}

impl PartitionReport {
    pub fn is_ok(&self) -> bool {
        self.overlaps.is_empty() && self.outside_carrier.is_empty() && self.uncovered.is_empty()
    }
}

fn random_point(n: usize, radius: i64, rng: &mut impl Rng) -> Point {
    (0..n)
        .map(|_| {
            let whole = int(rng.gen_range(-radius..radius));
            if rng.gen_range(0..4) == 0 {
                whole
            } else {
                whole + oracle::open_fraction(rng)
            }
        })
        .collect()
}

/// Points for coverage tests: boundary points of cells, which are the
/// likeliest to fall through gaps, mixed with points of a box.
fn probe_points(d: &Decomposition, count: usize, rng: &mut impl Rng) -> Vec<Point> {
    let radius = d
        .bounding_box()
        .map(|b| b.iter().flat_map(|(l, h)| [l, h]).map(|v| v.abs().ceil().to_integer()).max().unwrap_or_default())
        .ok()
        .and_then(|v| i64::try_from(v).ok())
        .unwrap_or(6)
        + 2;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i % 3 == 0 || d.cells.is_empty() {
            out.push(random_point(d.n, radius, rng));
        } else {
            let c = &d.cells[rng.gen_range(0..d.cells.len())];
            if let Ok(mut p) = oracle::sample_closure_points_with(c, 1, rng) {
                out.append(&mut p);
            }
        }
    }
    out
}

/// Exact disjointness and carrier containment of the cells, plus sampled
/// coverage: `samples` points of the carrier must each lie in some cell.
pub fn check_partition(d: &Decomposition, samples: usize, rng: &mut impl Rng) -> PartitionReport {
    let mut report = PartitionReport::default();
    let systems: Vec<LinearSystem> = d.cells.iter().map(LinearCell::system).collect();
    let mut proj = Projections::new(&d.cells);
    for a in 0..systems.len() {
        for b in a + 1..systems.len() {
            if !proj.apart(a, b, false) && feasible(&systems[a].and(&systems[b])) {
                report.overlaps.push((a, b));
            }
        }
    }
    if let Carrier::Set(y) = &d.carrier {
        for (i, c) in d.cells.iter().enumerate() {
            if cell_vs_set(c, y, d.n).ok().flatten() != Some(true) {
                report.outside_carrier.push(i);
            }
        }
    }
    let mut attempts = 0;
    while report.samples < samples && attempts < 8 * samples {
        let batch = probe_points(d, samples - report.samples, rng);
        attempts += batch.len().max(1);
        for p in batch {
            if !d.carrier.contains(&p) {
                continue;
            }
            report.samples += 1;
            if !d.union_contains(&p) {
                report.uncovered.push(p);
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RefinementReport {
    pub samples: usize,
    /// Cells of the fine decomposition inside no coarse cell.
    pub unplaced: Vec<usize>,
    #[serde(with = "crate::scalar::serde_points")]
    pub uncovered: Vec<Point>,
}

impl RefinementReport {
    pub fn is_ok(&self) -> bool {
        self.unplaced.is_empty() && self.uncovered.is_empty()
    }
}

/// Every fine cell must lie inside a coarse cell (exact), and sampled
/// points of each coarse cell must lie in a fine cell inside it.
pub fn check_refinement(coarse: &Decomposition, fine: &Decomposition, samples: usize, rng: &mut impl Rng) -> RefinementReport {
    let mut report = RefinementReport::default();
    let mut proj = Projections::new(fine.cells.iter().chain(&coarse.cells));
    let offset = fine.cells.len();
    let parent: Vec<Option<usize>> = (0..offset)
        .map(|i| (0..coarse.cells.len()).find(|&j| !proj.apart(i, offset + j, false) && fine.cells[i].subset_of(&coarse.cells[j])))
        .collect();
    report.unplaced = parent.iter().enumerate().filter(|(_, p)| p.is_none()).map(|(i, _)| i).collect();
    if coarse.cells.is_empty() {
        return report;
    }
    for i in 0..samples {
        let ci = i % coarse.cells.len();
        let c = &coarse.cells[ci];
        let pts = if rng.gen_range(0..2) == 0 {
            c.sample_points(1, rng)
        } else {
            oracle::sample_closure_points_with(c, 1, rng)
        };
        let Some(p) = pts.ok().and_then(|mut v| v.pop()) else { continue };
        let Some(home) = coarse.find_cell(&p) else { continue };
        report.samples += 1;
        match fine.find_cell(&p) {
            Some(j) if parent[j] == Some(home) => {}
            _ => report.uncovered.push(p),
        }
    }
    report
}
