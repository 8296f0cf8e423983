//! Boolean combinations of affine sign conditions.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{Constraint, LinearSystem};
use crate::scalar::{AffineMap, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AtomRel {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
}

impl AtomRel {
    fn accepts(self, sign: Ordering) -> bool {
        match self {
            AtomRel::Ge => sign != Ordering::Less,
            AtomRel::Gt => sign == Ordering::Greater,
            AtomRel::Eq => sign == Ordering::Equal,
        }
    }
}

/// A formula over atoms `f(x) rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Formula {
    True,
    Atom { f: AffineMap, rel: AtomRel },
    And { args: Vec<Formula> },
    Or { args: Vec<Formula> },
    Not { arg: Box<Formula> },
}

impl Formula {
    pub fn ge(f: AffineMap) -> Self {
        Formula::Atom { f, rel: AtomRel::Ge }
    }

    pub fn gt(f: AffineMap) -> Self {
        Formula::Atom { f, rel: AtomRel::Gt }
    }

    pub fn eq(f: AffineMap) -> Self {
        Formula::Atom { f, rel: AtomRel::Eq }
    }

    pub fn and(args: Vec<Formula>) -> Self {
        Formula::And { args }
    }

    pub fn or(args: Vec<Formula>) -> Self {
        Formula::Or { args }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(arg: Formula) -> Self {
        Formula::Not { arg: Box::new(arg) }
    }

    /// The open box `∏ (aᵢ, bᵢ)`.
    pub fn open_box(bounds: &[(Scalar, Scalar)]) -> Self {
        let n = bounds.len();
        let mut args = Vec::with_capacity(2 * n);
        for (i, (a, b)) in bounds.iter().enumerate() {
            let x = AffineMap::coordinate(n, i);
            args.push(Formula::gt(&x - &AffineMap::constant(n, a.clone())));
            args.push(Formula::gt(&AffineMap::constant(n, b.clone()) - &x));
        }
        Formula::and(args)
    }

    pub fn check_arity(&self, n: usize) -> Result<()> {
        let mut atoms = Vec::new();
        self.collect_atoms(&mut atoms);
        match atoms.iter().find(|f| f.arity() != n) {
            Some(f) => Err(Error::Arity { expected: n, got: f.arity() }),
            None => Ok(()),
        }
    }

    pub fn collect_atoms(&self, out: &mut Vec<AffineMap>) {
        match self {
            Formula::True => {}
            Formula::Atom { f, .. } => out.push(f.clone()),
            Formula::And { args } | Formula::Or { args } => args.iter().for_each(|a| a.collect_atoms(out)),
            Formula::Not { arg } => arg.collect_atoms(out),
        }
    }

    pub fn holds(&self, x: &[Scalar]) -> bool {
        self.eval_with(&mut |f| f.eval_prefix(x).cmp(&Scalar::from_integer(0.into())))
    }

    /// Evaluates the formula given the sign of each atom.
    pub fn eval_with(&self, sign: &mut impl FnMut(&AffineMap) -> Ordering) -> bool {
        match self {
            Formula::True => true,
            Formula::Atom { f, rel } => rel.accepts(sign(f)),
            Formula::And { args } => args.iter().all(|a| a.eval_with(sign)),
            Formula::Or { args } => args.iter().any(|a| a.eval_with(sign)),
            Formula::Not { arg } => !arg.eval_with(sign),
        }
    }

    /// Disjunctive normal form as a list of conjunctions.
    pub fn dnf(&self, n: usize) -> Vec<LinearSystem> {
        self.dnf_signed(false)
            .into_iter()
            .map(|cs| LinearSystem::from_constraints(n, cs))
            .collect()
    }

    fn dnf_signed(&self, negated: bool) -> Vec<Vec<Constraint>> {
        match (self, negated) {
            (Formula::True, false) => vec![vec![]],
            (Formula::True, true) => vec![],
            (Formula::Atom { f, rel }, _) => {
                let c = match rel {
                    AtomRel::Ge => Constraint::le(-f),
                    AtomRel::Gt => Constraint::lt(-f),
                    AtomRel::Eq => Constraint::eq(f.clone()),
                };
                if negated {
                    c.negation().into_iter().map(|c| vec![c]).collect()
                } else {
                    vec![vec![c]]
                }
            }
            (Formula::Not { arg }, _) => arg.dnf_signed(!negated),
            (Formula::And { args }, false) | (Formula::Or { args }, true) => {
                let mut acc = vec![vec![]];
                for a in args {
                    let terms = a.dnf_signed(negated);
                    acc = acc
                        .iter()
                        .flat_map(|p| {
                            terms.iter().map(move |t| {
                                let mut q = p.clone();
                                q.extend(t.iter().cloned());
                                q
                            })
                        })
                        .collect();
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            (Formula::Or { args }, false) | (Formula::And { args }, true) => {
                args.iter().flat_map(|a| a.dnf_signed(negated)).collect()
            }
        }
    }
}

/// A semi-linear subset of `Rⁿ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiLinearSet {
    pub n: usize,
    pub formula: Formula,
}

impl SemiLinearSet {
    pub fn new(n: usize, formula: Formula) -> Result<Self> {
        formula.check_arity(n)?;
        Ok(Self { n, formula })
    }

    pub fn contains(&self, x: &[Scalar]) -> bool {
        x.len() == self.n && self.formula.holds(x)
    }
}
