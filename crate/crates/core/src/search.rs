//! Generation of quantum modal structures and countermodel search.
//!
//! Exhaustive enumeration walks structures in canonical order:
//! world count, then the `rq` code, then the `rm` code, then the valuation
//! (one closed-set index per atom, first atom most significant).
//!
//! * `rq` code: bit `k` is set when the `k`-th off-diagonal pair
//!   `(0,1), (0,2), .., (0,n-1), (1,2), ..` is related.
//! * `rm` code: bit `i * n + l` is set when `rm(i, l)`.
//!
//! Only relations satisfying the forcing condition are generated: the rows of
//! `rm` are constant on `rq`-components, so each component picks one row.
//! No isomorphism reduction is done; structures that differ only by a
//! permutation of worlds all appear.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::eval::{holds, EntailmentQuery, Program};
use crate::formula::{Atom, Formula};
use crate::frame::{
    component_masks, full_mask, ortho_mask, Relation, Structure, WorldSet, MAX_WORLDS,
    SUBSET_ENUMERATION_LIMIT,
};

pub const DEFAULT_MAX_WORLDS: usize = 4;
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 4;
/// `rm` codes must fit into 64 bits.
pub const HARD_EXHAUSTIVE_LIMIT: usize = 8;
pub const MAX_WORLDS_ENV: &str = "QMLKIT_MAX_WORLDS";

/// Default world budget, overridable through `QMLKIT_MAX_WORLDS`.
pub fn default_max_worlds() -> usize {
    std::env::var(MAX_WORLDS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(DEFAULT_MAX_WORLDS)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("exhaustive search over {max_worlds} worlds exceeds the limit of {limit}")]
    BudgetExceeded { max_worlds: usize, limit: usize },
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Random { seed: u64, samples: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_worlds: usize,
    /// Atoms valued by [`enumerate_structures`]. Query searches value exactly
    /// the atoms occurring in the query instead.
    pub atoms: Vec<Atom>,
    pub mode: SearchMode,
    pub exhaustive_limit: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget::exhaustive(DEFAULT_MAX_WORLDS)
    }
}

impl SearchBudget {
    pub fn exhaustive(max_worlds: usize) -> Self {
        SearchBudget {
            max_worlds,
            atoms: Vec::new(),
            mode: SearchMode::Exhaustive,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
        }
    }

    pub fn random(max_worlds: usize, seed: u64, samples: usize) -> Self {
        SearchBudget {
            mode: SearchMode::Random { seed, samples },
            ..SearchBudget::exhaustive(max_worlds)
        }
    }

    pub fn with_atoms(mut self, atoms: impl IntoIterator<Item = Atom>) -> Self {
        self.atoms = atoms.into_iter().collect();
        self
    }

    pub fn with_exhaustive_limit(mut self, limit: usize) -> Self {
        self.exhaustive_limit = limit;
        self
    }

    pub fn check(&self) -> Result<(), SearchError> {
        if self.max_worlds == 0 {
            return Err(SearchError::InvalidBudget(
                "max_worlds must be at least 1".into(),
            ));
        }
        match self.mode {
            SearchMode::Exhaustive => {
                let limit = self.exhaustive_limit.min(HARD_EXHAUSTIVE_LIMIT);
                if self.max_worlds > limit {
                    return Err(SearchError::BudgetExceeded {
                        max_worlds: self.max_worlds,
                        limit,
                    });
                }
            }
            SearchMode::Random { .. } => {
                if self.max_worlds > MAX_WORLDS {
                    return Err(SearchError::InvalidBudget(format!(
                        "random mode supports at most {MAX_WORLDS} worlds"
                    )));
                }
            }
        }
        let distinct: BTreeSet<_> = self.atoms.iter().collect();
        if distinct.len() != self.atoms.len() {
            return Err(SearchError::InvalidBudget("duplicate atom".into()));
        }
        Ok(())
    }
}

/// `p, q, r, ...`: the first `k` default atom names.
pub fn default_atoms(k: usize) -> Vec<Atom> {
    const NAMES: &str = "pqrstuvwxyzabcdefghijklmno";
    NAMES
        .chars()
        .take(k)
        .map(|c| Atom::new(&c.to_string()).expect("valid"))
        .chain((NAMES.len()..k).map(|i| Atom::new(&format!("p{i}")).expect("valid")))
        .collect()
}

// ---------------------------------------------------------------------------
// Frame space

/// One reflexive symmetric `rq` together with the data the enumerator needs.
#[derive(Debug, Clone)]
pub(crate) struct RqFrame {
    pub n: usize,
    pub rows: Vec<u64>,
    /// Components sorted by their largest world, descending: the order in
    /// which they contribute to the `rm` code from its most significant end.
    pub components: Vec<u64>,
    pub closed: Vec<u64>,
}

impl RqFrame {
    /// Number of forced `rm` relations.
    pub fn rm_count(&self) -> u64 {
        1u64 << (self.n * self.components.len())
    }

    /// The `index`-th forced `rm` in ascending code order, as rows.
    pub fn rm_rows(&self, index: u64, rows: &mut [u64]) {
        let n = self.n;
        let c = self.components.len();
        for (k, comp) in self.components.iter().enumerate() {
            let digit = index >> (n * (c - 1 - k)) & full_mask(n);
            let mut rest = *comp;
            while rest != 0 {
                let w = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                rows[w] = digit;
            }
        }
    }
}

fn off_diagonal_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

pub(crate) fn rq_rows_from_code(n: usize, code: u64) -> Vec<u64> {
    let mut rows: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    for (k, (i, j)) in off_diagonal_pairs(n).into_iter().enumerate() {
        if code >> k & 1 == 1 {
            rows[i] |= 1 << j;
            rows[j] |= 1 << i;
        }
    }
    rows
}

pub(crate) fn rq_frame(n: usize, code: u64, with_closed: bool) -> RqFrame {
    let rows = rq_rows_from_code(n, code);
    let mut components = component_masks(&rows);
    components.sort_by_key(|c| std::cmp::Reverse(63 - c.leading_zeros()));
    let closed = if with_closed {
        (0..1u64 << n)
            .filter(|&x| ortho_mask(&rows, ortho_mask(&rows, x)) == x)
            .collect()
    } else {
        Vec::new()
    };
    RqFrame {
        n,
        rows,
        components,
        closed,
    }
}

/// Every reflexive symmetric relation on `n` worlds, ascending by code.
pub(crate) fn rq_frames(n: usize) -> Vec<RqFrame> {
    let pairs = n * (n - 1) / 2;
    (0..1u64 << pairs)
        .map(|code| rq_frame(n, code, true))
        .collect()
}

fn rm_code(rows: &[u64]) -> u64 {
    let n = rows.len();
    rows.iter()
        .enumerate()
        .fold(0, |acc, (i, row)| acc | row << (i * n))
}

/// A structure as raw bitmasks, borrowed from the enumerator.
pub(crate) struct RawStructure<'a> {
    pub n: usize,
    pub rq_rows: &'a [u64],
    pub rm_rows: &'a [u64],
    pub atom_values: &'a [u64],
}

impl RawStructure<'_> {
    pub fn to_structure(&self, atoms: &[Atom]) -> Structure {
        let valuation = atoms
            .iter()
            .zip(self.atom_values)
            .map(|(a, &v)| (a.clone(), WorldSet::from_bits(self.n, v).expect("in range")))
            .collect();
        Structure::new(
            self.n,
            Relation::from_rows(self.n, self.rq_rows.to_vec()).expect("in range"),
            Relation::from_rows(self.n, self.rm_rows.to_vec()).expect("in range"),
            valuation,
        )
        .expect("consistent sizes")
    }
}

/// Advances a little-endian-last odometer; returns false after the last
/// combination.
fn advance(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Visits every structure with `1..=max_worlds` worlds and `atom_count`
/// valued atoms in canonical order, in parallel, and returns the result of
/// the canonically first visit that yields `Some`. With `vary_rm` false only
/// the empty `rm` is visited.
pub(crate) fn scan_exhaustive<R, V>(
    max_worlds: usize,
    atom_count: usize,
    vary_rm: bool,
    visit: V,
) -> Option<R>
where
    R: Send,
    V: Fn(&RawStructure, &mut Vec<u64>) -> Option<R> + Sync,
{
    for n in 1..=max_worlds {
        let frames = rq_frames(n);
        // job j runs rm index j - starts[f] of frame f
        let mut starts = Vec::with_capacity(frames.len());
        let mut total = 0u64;
        for frame in &frames {
            starts.push(total);
            total += if vary_rm { frame.rm_count() } else { 1 };
        }
        let found = (0..total).into_par_iter().find_map_first(|job| {
            let f = starts.partition_point(|&s| s <= job) - 1;
            let k = job - starts[f];
            let frame = &frames[f];
            let mut rm_rows = vec![0u64; n];
            if vary_rm {
                frame.rm_rows(k, &mut rm_rows);
            }
            let mut scratch = Vec::new();
            let mut digits = vec![0usize; atom_count];
            let mut values = vec![0u64; atom_count];
            loop {
                for (v, &d) in values.iter_mut().zip(&digits) {
                    *v = frame.closed[d];
                }
                let raw = RawStructure {
                    n,
                    rq_rows: &frame.rows,
                    rm_rows: &rm_rows,
                    atom_values: &values,
                };
                if let Some(r) = visit(&raw, &mut scratch) {
                    return Some(r);
                }
                if !advance(&mut digits, frame.closed.len()) {
                    return None;
                }
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Visits `samples` random structures in seed order and returns the first
/// `Some`.
pub(crate) fn scan_random<R, V>(
    max_worlds: usize,
    atom_count: usize,
    vary_rm: bool,
    seed: u64,
    samples: usize,
    mut visit: V,
) -> Option<R>
where
    V: FnMut(&RawStructure, &mut Vec<u64>) -> Option<R>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = Vec::new();
    for _ in 0..samples {
        let (n, rq, rm, values) = random_raw(&mut rng, max_worlds, atom_count, vary_rm);
        let raw = RawStructure {
            n,
            rq_rows: &rq,
            rm_rows: &rm,
            atom_values: &values,
        };
        if let Some(r) = visit(&raw, &mut scratch) {
            return Some(r);
        }
    }
    None
}

fn random_raw(
    rng: &mut ChaCha8Rng,
    max_worlds: usize,
    atom_count: usize,
    vary_rm: bool,
) -> (usize, Vec<u64>, Vec<u64>, Vec<u64>) {
    let n = rng.gen_range(1..=max_worlds);
    let mut rq: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    for (i, j) in off_diagonal_pairs(n) {
        if rng.gen_bool(0.5) {
            rq[i] |= 1 << j;
            rq[j] |= 1 << i;
        }
    }
    let mut rm = vec![0u64; n];
    if vary_rm {
        for comp in component_masks(&rq) {
            let row = rng.gen::<u64>() & full_mask(n);
            let mut rest = comp;
            while rest != 0 {
                let w = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                rm[w] = row;
            }
        }
    }
    let closed: Option<Vec<u64>> = (n <= SUBSET_ENUMERATION_LIMIT).then(|| {
        (0..1u64 << n)
            .filter(|&x| ortho_mask(&rq, ortho_mask(&rq, x)) == x)
            .collect()
    });
    let values = (0..atom_count)
        .map(|_| match &closed {
            Some(sets) => sets[rng.gen_range(0..sets.len())],
            None => {
                let x = rng.gen::<u64>() & full_mask(n);
                ortho_mask(&rq, ortho_mask(&rq, x))
            }
        })
        .collect();
    (n, rq, rm, values)
}

/// Runs `visit` over the budget's structure space: exhaustive in canonical
/// order or random in seed order.
pub(crate) fn scan<R, V>(
    budget: &SearchBudget,
    atom_count: usize,
    vary_rm: bool,
    visit: V,
) -> Result<Option<R>, SearchError>
where
    R: Send,
    V: Fn(&RawStructure, &mut Vec<u64>) -> Option<R> + Sync,
{
    budget.check()?;
    Ok(match budget.mode {
        SearchMode::Exhaustive => scan_exhaustive(budget.max_worlds, atom_count, vary_rm, visit),
        SearchMode::Random { seed, samples } => {
            scan_random(budget.max_worlds, atom_count, vary_rm, seed, samples, visit)
        }
    })
}

// ---------------------------------------------------------------------------
// Structure stream

enum StreamState {
    Exhaustive {
        n: usize,
        frames: Vec<RqFrame>,
        frame: usize,
        rm_index: u64,
        digits: Vec<usize>,
        done: bool,
    },
    Random {
        rng: Box<ChaCha8Rng>,
        remaining: usize,
    },
}

/// Iterator over the structures of a budget. Every item passes `validate`.
pub struct StructureStream {
    max_worlds: usize,
    atoms: Vec<Atom>,
    state: StreamState,
}

impl Iterator for StructureStream {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        let atom_count = self.atoms.len();
        match &mut self.state {
            StreamState::Random { rng, remaining } => {
                if *remaining == 0 {
                    return None;
                }
                *remaining -= 1;
                let (n, rq, rm, values) = random_raw(rng, self.max_worlds, atom_count, true);
                let raw = RawStructure {
                    n,
                    rq_rows: &rq,
                    rm_rows: &rm,
                    atom_values: &values,
                };
                Some(raw.to_structure(&self.atoms))
            }
            StreamState::Exhaustive {
                n,
                frames,
                frame,
                rm_index,
                digits,
                done,
            } => {
                if *done {
                    return None;
                }
                let fr = &frames[*frame];
                let mut rm_rows = vec![0u64; *n];
                fr.rm_rows(*rm_index, &mut rm_rows);
                let values: Vec<u64> = digits.iter().map(|&d| fr.closed[d]).collect();
                let item = RawStructure {
                    n: *n,
                    rq_rows: &fr.rows,
                    rm_rows: &rm_rows,
                    atom_values: &values,
                }
                .to_structure(&self.atoms);

                if !advance(digits, fr.closed.len()) {
                    *rm_index += 1;
                    if *rm_index == fr.rm_count() {
                        *rm_index = 0;
                        *frame += 1;
                        if *frame == frames.len() {
                            *frame = 0;
                            *n += 1;
                            if *n > self.max_worlds {
                                *done = true;
                            } else {
                                *frames = rq_frames(*n);
                            }
                        }
                    }
                }
                Some(item)
            }
        }
    }
}

/// Streams every structure of the budget (exhaustive) or `samples` random
/// ones (random mode).
pub fn enumerate_structures(budget: &SearchBudget) -> Result<StructureStream, SearchError> {
    budget.check()?;
    let state = match budget.mode {
        SearchMode::Exhaustive => StreamState::Exhaustive {
            n: 1,
            frames: rq_frames(1),
            frame: 0,
            rm_index: 0,
            digits: vec![0; budget.atoms.len()],
            done: false,
        },
        SearchMode::Random { seed, samples } => StreamState::Random {
            rng: Box::new(ChaCha8Rng::seed_from_u64(seed)),
            remaining: samples,
        },
    };
    Ok(StructureStream {
        max_worlds: budget.max_worlds,
        atoms: budget.atoms.clone(),
        state,
    })
}

/// Number of structures with exactly `n` worlds and `atom_count` atoms that
/// the exhaustive enumerator yields, computed per `rq` without building them.
pub fn count_structures(n: usize, atom_count: usize) -> Result<u128, SearchError> {
    if n == 0 || n > HARD_EXHAUSTIVE_LIMIT {
        return Err(SearchError::InvalidBudget(format!(
            "counting supports 1..={HARD_EXHAUSTIVE_LIMIT} worlds"
        )));
    }
    Ok(rq_frames(n)
        .iter()
        .map(|f| (f.rm_count() as u128) * (f.closed.len() as u128).pow(atom_count as u32))
        .sum())
}

// ---------------------------------------------------------------------------
// Countermodels

/// A structure and a world inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Countermodel {
    pub structure: Structure,
    pub world: usize,
}

impl Countermodel {
    /// The world satisfies all of `gamma` and falsifies `alpha`.
    pub fn refutes(&self, gamma: &BTreeSet<Formula>, alpha: &Formula) -> bool {
        self.satisfies_all(gamma) && holds(&self.structure, self.world, alpha) == Ok(false)
    }

    pub fn satisfies_all(&self, gamma: &BTreeSet<Formula>) -> bool {
        self.structure.is_valid()
            && gamma
                .iter()
                .all(|g| holds(&self.structure, self.world, g) == Ok(true))
    }
}

/// Witnesses against `gamma |= delta`: one countermodel per member of
/// `delta`, or, for an empty `delta`, a single world satisfying `gamma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refutation {
    PerFormula(BTreeMap<Formula, Countermodel>),
    EmptySuccedent(Countermodel),
}

impl Refutation {
    /// Re-checks every witness with the direct evaluator.
    pub fn verify(&self, q: &EntailmentQuery) -> bool {
        match self {
            Refutation::EmptySuccedent(cm) => q.delta.is_empty() && cm.satisfies_all(&q.gamma),
            Refutation::PerFormula(map) => {
                !q.delta.is_empty()
                    && map.keys().eq(q.delta.iter())
                    && map.iter().all(|(a, cm)| cm.refutes(&q.gamma, a))
            }
        }
    }
}

fn atoms_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Vec<Atom> {
    formulas
        .into_iter()
        .flat_map(|f| f.atoms())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Searches for a world satisfying all of `gamma` and none of `avoid`
/// (every member of `avoid` false there). Atoms valued are those occurring
/// in the formulas; when no formula contains a box only the empty `rm` is
/// tried, which leaves the canonically first hit unchanged.
fn find_world(
    gamma: &BTreeSet<Formula>,
    avoid: &[&Formula],
    budget: &SearchBudget,
) -> Result<Option<Countermodel>, SearchError> {
    let atoms = atoms_of(gamma.iter().chain(avoid.iter().copied()));
    let mut program = Program::new();
    // order the atoms canonically before anything else is compiled
    for a in &atoms {
        program.add(&Formula::Atom(a.clone()));
    }
    let gamma_ids: Vec<usize> = gamma.iter().map(|g| program.add(g)).collect();
    let avoid_ids: Vec<usize> = avoid.iter().map(|a| program.add(a)).collect();
    let vary_rm = program.contains_box();
    let hit = scan(budget, atoms.len(), vary_rm, |raw, out| {
        program.eval_masks(raw.rq_rows, raw.rm_rows, raw.atom_values, out);
        let mut bad = full_mask(raw.n);
        for &g in &gamma_ids {
            bad &= out[g];
        }
        for &a in &avoid_ids {
            bad &= !out[a];
        }
        (bad != 0).then(|| Countermodel {
            structure: raw.to_structure(&atoms),
            world: bad.trailing_zeros() as usize,
        })
    })?;
    Ok(hit)
}

/// First structure and world (canonical order, or seed order in random mode)
/// where all of `gamma` holds and `alpha` fails. `None` only means nothing
/// was found inside the budget.
pub fn find_countermodel(
    gamma: &BTreeSet<Formula>,
    alpha: &Formula,
    budget: &SearchBudget,
) -> Result<Option<Countermodel>, SearchError> {
    find_world(gamma, &[alpha], budget)
}

/// Refutes `gamma |= delta` by finding a countermodel for every member of
/// `delta` separately. `None` when some member resists within the budget.
pub fn refute_entailment(
    q: &EntailmentQuery,
    budget: &SearchBudget,
) -> Result<Option<Refutation>, SearchError> {
    if q.delta.is_empty() {
        return Ok(find_world(&q.gamma, &[], budget)?.map(Refutation::EmptySuccedent));
    }
    let mut witnesses = BTreeMap::new();
    for alpha in &q.delta {
        match find_countermodel(&q.gamma, alpha, budget)? {
            Some(cm) => {
                witnesses.insert(alpha.clone(), cm);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(Refutation::PerFormula(witnesses)))
}

/// A single world where all of `gamma` holds and every member of `delta`
/// fails: a countermodel to the world-wise reading of `gamma |- delta`.
pub fn find_pointwise_countermodel(
    q: &EntailmentQuery,
    budget: &SearchBudget,
) -> Result<Option<Countermodel>, SearchError> {
    let avoid: Vec<&Formula> = q.delta.iter().collect();
    find_world(&q.gamma, &avoid, budget)
}

/// Canonical position of a structure produced by the exhaustive enumerator:
/// `(n, rq code, rm code)`.
pub fn canonical_key(s: &Structure) -> (usize, u64, u64) {
    let n = s.size();
    let mut rq_code = 0;
    for (k, (i, j)) in off_diagonal_pairs(n).into_iter().enumerate() {
        if s.rq().contains(i, j) {
            rq_code |= 1 << k;
        }
    }
    (n, rq_code, rm_code(s.rm().rows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(text: &str) -> Formula {
        parse(text).unwrap()
    }

    fn set(fs: &[&str]) -> BTreeSet<Formula> {
        fs.iter().map(|t| f(t)).collect()
    }

    #[test]
    fn one_world_one_atom_gives_four_structures() {
        let budget = SearchBudget::exhaustive(1).with_atoms(default_atoms(1));
        let all: Vec<_> = enumerate_structures(&budget).unwrap().collect();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|s| s.is_valid()));
        assert_eq!(count_structures(1, 1).unwrap(), 4);
    }

    #[test]
    fn three_worlds_have_eight_rq() {
        let frames = rq_frames(3);
        assert_eq!(frames.len(), 8);
        let distinct: BTreeSet<_> = frames.iter().map(|f| f.rows.clone()).collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn stream_is_in_canonical_order_and_valid() {
        let budget = SearchBudget::exhaustive(3).with_atoms(default_atoms(1));
        let all: Vec<_> = enumerate_structures(&budget).unwrap().collect();
        assert_eq!(
            all.len() as u128,
            (1..=3).map(|n| count_structures(n, 1).unwrap()).sum()
        );
        assert!(all.iter().all(|s| s.is_valid()));
        let keys: Vec<_> = all.iter().map(canonical_key).collect();
        assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rm_index_order_matches_code_order() {
        for n in 1..=4 {
            for frame in rq_frames(n) {
                let mut rows = vec![0; n];
                let mut last = None;
                for k in 0..frame.rm_count() {
                    frame.rm_rows(k, &mut rows);
                    let code = rm_code(&rows);
                    assert!(last.is_none_or(|l| l < code));
                    last = Some(code);
                }
            }
        }
    }

    #[test]
    fn guard_is_enforced() {
        let budget = SearchBudget::exhaustive(5);
        assert_eq!(
            enumerate_structures(&budget).err(),
            Some(SearchError::BudgetExceeded {
                max_worlds: 5,
                limit: 4
            })
        );
        assert!(SearchBudget::exhaustive(5)
            .with_exhaustive_limit(5)
            .check()
            .is_ok());
        assert!(SearchBudget::exhaustive(9)
            .with_exhaustive_limit(100)
            .check()
            .is_err());
        assert!(SearchBudget::exhaustive(0).check().is_err());
        assert!(SearchBudget::random(10, 1, 5).check().is_ok());
    }

    #[test]
    fn simple_countermodel_at_one_world() {
        let cm = find_countermodel(&set(&["p"]), &f("q"), &SearchBudget::exhaustive(4))
            .unwrap()
            .unwrap();
        assert_eq!(cm.structure.size(), 1);
        assert_eq!(cm.world, 0);
        let p = Atom::new("p").unwrap();
        let q = Atom::new("q").unwrap();
        assert_eq!(cm.structure.value(&p), Some(WorldSet::full(1)));
        assert_eq!(cm.structure.value(&q), Some(WorldSet::empty(1)));
        assert!(cm.structure.rm().pairs().is_empty());
        assert!(cm.refutes(&set(&["p"]), &f("q")));
    }

    #[test]
    fn excluded_middle_has_no_countermodel() {
        let r = find_countermodel(&set(&[]), &f("p | ~p"), &SearchBudget::exhaustive(3)).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn refutation_examples() {
        let budget = SearchBudget::exhaustive(3);
        let q = EntailmentQuery::new([f("p")], [f("p"), f("q")]);
        assert!(refute_entailment(&q, &budget).unwrap().is_none());

        let q = EntailmentQuery::new([f("p")], [f("q")]);
        let r = refute_entailment(&q, &budget).unwrap().unwrap();
        assert!(r.verify(&q));

        let q = EntailmentQuery::new([f("p")], []);
        match refute_entailment(&q, &budget).unwrap().unwrap() {
            Refutation::EmptySuccedent(cm) => {
                assert_eq!(cm.structure.size(), 1);
                assert!(cm.satisfies_all(&q.gamma));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bare_mem_is_refuted_per_formula_but_not_pointwise() {
        let q = EntailmentQuery::new([], [f("[]p"), f("~[]p")]);
        let budget = SearchBudget::exhaustive(3);
        let r = refute_entailment(&q, &budget).unwrap().unwrap();
        assert!(r.verify(&q));
        assert!(find_pointwise_countermodel(&q, &budget).unwrap().is_none());
    }

    #[test]
    fn random_mode_is_reproducible() {
        let budget = SearchBudget::random(6, 42, 50).with_atoms(default_atoms(2));
        let a: Vec<_> = enumerate_structures(&budget).unwrap().collect();
        let b: Vec<_> = enumerate_structures(&budget).unwrap().collect();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.is_valid()));
        let other: Vec<_> =
            enumerate_structures(&SearchBudget::random(6, 43, 50).with_atoms(default_atoms(2)))
                .unwrap()
                .collect();
        assert_ne!(a, other);
    }

    #[test]
    fn default_atom_names() {
        let names: Vec<String> = default_atoms(3).iter().map(|a| a.to_string()).collect();
        assert_eq!(names, ["p", "q", "r"]);
    }
}
