//! Truth at a world, truth sets and entailment inside one structure.
//!
//! [`holds`] follows the truth clauses world by world and is kept
//! deliberately direct. [`truth_set`] goes through a compiled [`Program`]
//! that shares subformulas and computes one world set per node bottom-up;
//! this is the path used by the search and the harness.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::formula::{Atom, Formula};
use crate::frame::{box_mask, ortho_mask, Structure, WorldSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("atom '{0}' has no value in the structure")]
    UnknownAtom(Atom),
    #[error("world {world} out of range for a structure with {n} worlds")]
    WorldOutOfRange { world: usize, n: usize },
}

/// `i |= f` by direct recursion on the truth clauses:
/// atoms by valuation, conjunction pointwise, negation over `rq`-neighbours,
/// necessity over `rm`-successors.
pub fn holds(s: &Structure, i: usize, f: &Formula) -> Result<bool, EvalError> {
    if i >= s.size() {
        return Err(EvalError::WorldOutOfRange {
            world: i,
            n: s.size(),
        });
    }
    check_atoms(s, f)?;
    Ok(holds_unchecked(s, i, f))
}

fn holds_unchecked(s: &Structure, i: usize, f: &Formula) -> bool {
    match f {
        Formula::Atom(a) => s.value(a).is_some_and(|v| v.contains(i)),
        Formula::And(a, b) => holds_unchecked(s, i, a) && holds_unchecked(s, i, b),
        Formula::Not(a) => s.rq().row(i).iter().all(|j| !holds_unchecked(s, j, a)),
        Formula::Box(a) => s.rm().row(i).iter().all(|l| holds_unchecked(s, l, a)),
    }
}

fn check_atoms(s: &Structure, f: &Formula) -> Result<(), EvalError> {
    match f.atoms().into_iter().find(|a| s.value(a).is_none()) {
        Some(a) => Err(EvalError::UnknownAtom(a)),
        None => Ok(()),
    }
}

/// `{i | i |= f}`.
pub fn truth_set(s: &Structure, f: &Formula) -> Result<WorldSet, EvalError> {
    let mut program = Program::new();
    let root = program.add(f);
    let values = program.eval(s)?;
    Ok(values[root])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Atom(usize),
    And(usize, usize),
    Not(usize),
    Box(usize),
}

/// A set of formulas compiled into a shared DAG. Node ids are handed out in
/// an order where children always precede their parents.
#[derive(Debug, Clone, Default)]
pub struct Program {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    atoms: Vec<Atom>,
    atom_index: HashMap<Atom, usize>,
    has_box: bool,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    /// Compiles `formulas`, returning the program and one node id per input.
    pub fn compile<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> (Self, Vec<usize>) {
        let mut program = Program::new();
        let ids = formulas.into_iter().map(|f| program.add(f)).collect();
        (program, ids)
    }

    /// Adds `f` (and its subformulas) and returns its node id.
    pub fn add(&mut self, f: &Formula) -> usize {
        let node = match f {
            Formula::Atom(a) => {
                let next = self.atoms.len();
                let k = *self.atom_index.entry(a.clone()).or_insert(next);
                if k == next {
                    self.atoms.push(a.clone());
                }
                Node::Atom(k)
            }
            Formula::And(a, b) => {
                let a = self.add(a);
                let b = self.add(b);
                Node::And(a, b)
            }
            Formula::Not(a) => Node::Not(self.add(a)),
            Formula::Box(a) => {
                self.has_box = true;
                Node::Box(self.add(a))
            }
        };
        self.intern(node)
    }

    fn intern(&mut self, node: Node) -> usize {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.index.insert(node, id);
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Atoms in order of first appearance; `eval_masks` expects their values
    /// in this order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn contains_box(&self) -> bool {
        self.has_box
    }

    /// Evaluates every node on raw bitmask rows. `out` is resized to the
    /// number of nodes.
    pub(crate) fn eval_masks(
        &self,
        rq_rows: &[u64],
        rm_rows: &[u64],
        atom_values: &[u64],
        out: &mut Vec<u64>,
    ) {
        out.clear();
        out.reserve(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::Atom(k) => atom_values[k],
                Node::And(a, b) => out[a] & out[b],
                Node::Not(a) => ortho_mask(rq_rows, out[a]),
                Node::Box(a) => box_mask(rm_rows, out[a]),
            };
            out.push(v);
        }
    }

    /// Truth sets of every node in `s`.
    pub fn eval(&self, s: &Structure) -> Result<Vec<WorldSet>, EvalError> {
        let atom_values = self
            .atoms
            .iter()
            .map(|a| {
                s.value(a)
                    .map(|v| v.bits())
                    .ok_or_else(|| EvalError::UnknownAtom(a.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = Vec::new();
        self.eval_masks(s.rq().rows(), s.rm().rows(), &atom_values, &mut out);
        Ok(out
            .into_iter()
            .map(|bits| WorldSet::from_bits(s.size(), bits).expect("in range"))
            .collect())
    }
}

/// A pair of finite formula sets `(gamma, delta)` asking whether `gamma`
/// entails `delta`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntailmentQuery {
    pub gamma: BTreeSet<Formula>,
    pub delta: BTreeSet<Formula>,
}

impl EntailmentQuery {
    pub fn new(
        gamma: impl IntoIterator<Item = Formula>,
        delta: impl IntoIterator<Item = Formula>,
    ) -> Self {
        EntailmentQuery {
            gamma: gamma.into_iter().collect(),
            delta: delta.into_iter().collect(),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.gamma
            .iter()
            .chain(&self.delta)
            .flat_map(|f| f.atoms())
            .collect()
    }
}

fn satisfies_gamma(s: &Structure, gamma: &BTreeSet<Formula>) -> Result<WorldSet, EvalError> {
    let mut sat = s.all_worlds();
    for g in gamma {
        sat = sat.intersection(&truth_set(s, g)?);
    }
    Ok(sat)
}

/// Per-structure entailment: some `a` in `delta` is true wherever all of
/// `gamma` is. With an empty `delta` this asks that no world satisfies
/// `gamma`.
pub fn entails_in(s: &Structure, q: &EntailmentQuery) -> Result<bool, EvalError> {
    let sat = satisfies_gamma(s, &q.gamma)?;
    if q.delta.is_empty() {
        return Ok(sat.is_empty());
    }
    for a in &q.delta {
        if sat.is_subset(&truth_set(s, a)?) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// World-wise entailment: every world satisfying all of `gamma` satisfies
/// at least one member of `delta`. Implied by [`entails_in`]; the two agree
/// whenever `delta` has at most one element.
pub fn entails_pointwise_in(s: &Structure, q: &EntailmentQuery) -> Result<bool, EvalError> {
    let sat = satisfies_gamma(s, &q.gamma)?;
    let mut covered = WorldSet::empty(s.size());
    for a in &q.delta {
        covered = covered.union(&truth_set(s, a)?);
    }
    Ok(sat.is_subset(&covered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::frame::Relation;
    use std::collections::BTreeMap;

    fn f(text: &str) -> Formula {
        parse(text).unwrap()
    }

    fn structure(rq: Relation, rm: Relation, val: &[(&str, &[usize])]) -> Structure {
        let n = rq.size();
        let valuation: BTreeMap<_, _> = val
            .iter()
            .map(|(a, ws)| {
                (
                    Atom::new(a).unwrap(),
                    WorldSet::from_worlds(n, ws.iter().copied()).unwrap(),
                )
            })
            .collect();
        Structure::new(n, rq, rm, valuation).unwrap()
    }

    fn chain3() -> Relation {
        Relation::from_pairs(3, [(0, 1), (1, 0), (1, 2), (2, 1)])
            .unwrap()
            .with_reflexive_closure()
    }

    #[test]
    fn vacuous_box() {
        let s = structure(Relation::identity(2), Relation::empty(2), &[("p", &[])]);
        for i in 0..2 {
            assert!(holds(&s, i, &f("[]p")).unwrap());
        }
        assert!(holds(&s, 0, &f("~p")).unwrap());
    }

    #[test]
    fn negation_over_chain() {
        let s = structure(chain3(), Relation::identity(3), &[("p", &[0])]);
        assert!(!holds(&s, 1, &f("~p")).unwrap());
        assert!(holds(&s, 2, &f("~p")).unwrap());
        assert_eq!(
            truth_set(&s, &f("~~p")).unwrap(),
            WorldSet::from_worlds(3, [0]).unwrap()
        );
    }

    #[test]
    fn errors() {
        let s = structure(Relation::identity(1), Relation::empty(1), &[("p", &[0])]);
        assert_eq!(
            holds(&s, 0, &f("p & q")),
            Err(EvalError::UnknownAtom(Atom::new("q").unwrap()))
        );
        assert_eq!(
            holds(&s, 1, &f("p")),
            Err(EvalError::WorldOutOfRange { world: 1, n: 1 })
        );
        assert!(truth_set(&s, &f("[]q")).is_err());
    }

    #[test]
    fn entailment_examples() {
        let s = structure(
            Relation::identity(1),
            Relation::empty(1),
            &[("p", &[0]), ("q", &[])],
        );
        let q = EntailmentQuery::new([f("p")], [f("p")]);
        assert!(entails_in(&s, &q).unwrap());
        let q = EntailmentQuery::new([f("p")], [f("q")]);
        assert!(!entails_in(&s, &q).unwrap());
        let q = EntailmentQuery::new([f("p")], []);
        assert!(!entails_in(&s, &q).unwrap());
        let q = EntailmentQuery::new([f("q")], []);
        assert!(entails_in(&s, &q).unwrap());
    }

    #[test]
    fn pointwise_is_weaker_than_per_formula() {
        // two worlds, rm sends only world 0 to itself, p nowhere:
        // []p holds at 1 only, ~[]p at 0 only
        let s = structure(
            Relation::identity(2),
            Relation::from_pairs(2, [(0, 0)]).unwrap(),
            &[("p", &[])],
        );
        let q = EntailmentQuery::new([], [f("[]p"), f("~[]p")]);
        assert!(!entails_in(&s, &q).unwrap());
        assert!(entails_pointwise_in(&s, &q).unwrap());
    }

    #[test]
    fn program_shares_subformulas() {
        let (program, ids) = Program::compile(&[f("p & ~p"), f("~p"), f("[]~p")]);
        assert_eq!(program.len(), 4);
        assert_eq!(ids[1], 1);
        assert!(program.contains_box());
        assert_eq!(program.atoms(), &[Atom::new("p").unwrap()]);
    }
}
