//! Finite quantum modal structures.
//!
//! A structure is a world set `0..n`, a non-orthogonality relation `rq`
//! (reflexive and symmetric), an accessibility relation `rm` forced by `rq`,
//! and a valuation sending atoms to `rq`-closed world sets. World sets and
//! relation rows are bitmasks, so a structure holds at most [`MAX_WORLDS`]
//! worlds.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::formula::Atom;

pub const MAX_WORLDS: usize = 64;

/// Largest world count for operations that enumerate all `2^n` subsets.
pub const SUBSET_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("world count must be between 1 and {MAX_WORLDS}, got {0}")]
    WorldCount(usize),
    #[error("world {world} out of range for a structure with {n} worlds")]
    WorldOutOfRange { world: usize, n: usize },
    #[error("size mismatch: expected {expected} worlds, got {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("subset enumeration needs n <= {SUBSET_ENUMERATION_LIMIT}, got {0}")]
    TooLarge(usize),
    #[error("rq is not reflexive and symmetric")]
    NotSimilarity,
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A subset of the worlds `0..n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldSet {
    bits: u64,
    n: u8,
}

impl WorldSet {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_WORLDS);
        WorldSet {
            bits: 0,
            n: n as u8,
        }
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_WORLDS);
        WorldSet {
            bits: full_mask(n),
            n: n as u8,
        }
    }

    /// Builds a set from a raw mask; bits at or above `n` are an error.
    pub fn from_bits(n: usize, bits: u64) -> Result<Self, FrameError> {
        if n > MAX_WORLDS {
            return Err(FrameError::WorldCount(n));
        }
        if bits & !full_mask(n) != 0 {
            return Err(FrameError::WorldOutOfRange {
                world: 63 - bits.leading_zeros() as usize,
                n,
            });
        }
        Ok(WorldSet { bits, n: n as u8 })
    }

    pub fn from_worlds(
        n: usize,
        worlds: impl IntoIterator<Item = usize>,
    ) -> Result<Self, FrameError> {
        let mut set = WorldSet::empty(n);
        for w in worlds {
            if w >= n {
                return Err(FrameError::WorldOutOfRange { world: w, n });
            }
            set.bits |= 1 << w;
        }
        Ok(set)
    }

    pub fn singleton(n: usize, world: usize) -> Self {
        assert!(world < n);
        WorldSet {
            bits: 1 << world,
            n: n as u8,
        }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn universe_size(&self) -> usize {
        self.n as usize
    }

    pub fn contains(&self, world: usize) -> bool {
        world < self.n as usize && self.bits >> world & 1 == 1
    }

    pub fn insert(&mut self, world: usize) {
        assert!(world < self.n as usize);
        self.bits |= 1 << world;
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_full(&self) -> bool {
        self.bits == full_mask(self.n as usize)
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        debug_assert_eq!(self.n, other.n);
        WorldSet {
            bits: self.bits | other.bits,
            n: self.n,
        }
    }

    pub fn intersection(&self, other: &WorldSet) -> WorldSet {
        debug_assert_eq!(self.n, other.n);
        WorldSet {
            bits: self.bits & other.bits,
            n: self.n,
        }
    }

    /// Complement within `0..n`.
    pub fn complement(&self) -> WorldSet {
        WorldSet {
            bits: !self.bits & full_mask(self.n as usize),
            n: self.n,
        }
    }

    pub fn is_subset(&self, other: &WorldSet) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (0..self.n as usize).filter(move |w| bits >> w & 1 == 1)
    }

    pub fn first(&self) -> Option<usize> {
        (self.bits != 0).then(|| self.bits.trailing_zeros() as usize)
    }
}

impl fmt::Debug for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, w) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("}")
    }
}

/// Mask-level orthocomplement: worlds whose `rq`-row misses `x`.
#[inline]
pub(crate) fn ortho_mask(rq_rows: &[u64], x: u64) -> u64 {
    let mut out = 0;
    for (j, row) in rq_rows.iter().enumerate() {
        if row & x == 0 {
            out |= 1 << j;
        }
    }
    out
}

/// Mask-level necessity: worlds whose `rm`-row is inside `x`.
#[inline]
pub(crate) fn box_mask(rm_rows: &[u64], x: u64) -> u64 {
    let mut out = 0;
    for (i, row) in rm_rows.iter().enumerate() {
        if row & !x == 0 {
            out |= 1 << i;
        }
    }
    out
}

/// Square boolean matrix over `0..n`, stored as one bitmask row per world.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    rows: Vec<u64>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        assert!((1..=MAX_WORLDS).contains(&n));
        Relation {
            n,
            rows: vec![0; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = Relation::empty(n);
        for i in 0..n {
            r.rows[i] = 1 << i;
        }
        r
    }

    pub fn total(n: usize) -> Self {
        Relation {
            n,
            rows: vec![full_mask(n); n],
        }
    }

    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, FrameError> {
        if !(1..=MAX_WORLDS).contains(&n) {
            return Err(FrameError::WorldCount(n));
        }
        let mut r = Relation::empty(n);
        for (i, j) in pairs {
            r.try_insert(i, j)?;
        }
        Ok(r)
    }

    pub fn from_rows(n: usize, rows: Vec<u64>) -> Result<Self, FrameError> {
        if !(1..=MAX_WORLDS).contains(&n) {
            return Err(FrameError::WorldCount(n));
        }
        if rows.len() != n {
            return Err(FrameError::SizeMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        for row in &rows {
            WorldSet::from_bits(n, *row)?;
        }
        Ok(Relation { n, rows })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.rows[i] >> j & 1 == 1
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.try_insert(i, j).expect("pair in range");
    }

    fn try_insert(&mut self, i: usize, j: usize) -> Result<(), FrameError> {
        for w in [i, j] {
            if w >= self.n {
                return Err(FrameError::WorldOutOfRange {
                    world: w,
                    n: self.n,
                });
            }
        }
        self.rows[i] |= 1 << j;
        Ok(())
    }

    /// Adds `(i, i)` for every world.
    pub fn with_reflexive_closure(mut self) -> Self {
        for i in 0..self.n {
            self.rows[i] |= 1 << i;
        }
        self
    }

    pub fn row(&self, i: usize) -> WorldSet {
        WorldSet {
            bits: self.rows[i],
            n: self.n as u8,
        }
    }

    pub fn column(&self, j: usize) -> WorldSet {
        let mut bits = 0;
        for (i, row) in self.rows.iter().enumerate() {
            if row >> j & 1 == 1 {
                bits |= 1 << i;
            }
        }
        WorldSet {
            bits,
            n: self.n as u8,
        }
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// All pairs in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.contains(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|i| self.contains(i, i))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.contains(i, j) == self.contains(j, i)))
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.n).all(|i| {
            self.row(i)
                .iter()
                .all(|j| self.rows[j] & !self.rows[i] == 0)
        })
    }

    /// `{j | for all k in x, not R(j, k)}`. For a similarity relation this is
    /// the orthocomplement of `x`.
    pub fn ortho(&self, x: &WorldSet) -> Result<WorldSet, FrameError> {
        self.check_set(x)?;
        Ok(WorldSet {
            bits: ortho_mask(&self.rows, x.bits),
            n: self.n as u8,
        })
    }

    pub fn biortho(&self, x: &WorldSet) -> Result<WorldSet, FrameError> {
        let o = self.ortho(x)?;
        self.ortho(&o)
    }

    pub fn is_closed(&self, x: &WorldSet) -> Result<bool, FrameError> {
        Ok(self.biortho(x)? == *x)
    }

    /// Fixed points of `biortho`, in increasing order of their bitmask.
    pub fn closed_sets(&self) -> Result<Vec<WorldSet>, FrameError> {
        Ok(self
            .closed_masks()?
            .into_iter()
            .map(|bits| WorldSet {
                bits,
                n: self.n as u8,
            })
            .collect())
    }

    pub(crate) fn closed_masks(&self) -> Result<Vec<u64>, FrameError> {
        if self.n > SUBSET_ENUMERATION_LIMIT {
            return Err(FrameError::TooLarge(self.n));
        }
        Ok((0..1u64 << self.n)
            .filter(|&x| ortho_mask(&self.rows, ortho_mask(&self.rows, x)) == x)
            .collect())
    }

    /// Connected components of a reflexive symmetric relation, ordered by
    /// their smallest world.
    pub fn components(&self) -> Result<Vec<WorldSet>, FrameError> {
        if !self.is_reflexive() || !self.is_symmetric() {
            return Err(FrameError::NotSimilarity);
        }
        Ok(component_masks(&self.rows)
            .into_iter()
            .map(|bits| WorldSet {
                bits,
                n: self.n as u8,
            })
            .collect())
    }

    fn check_set(&self, x: &WorldSet) -> Result<(), FrameError> {
        if x.n as usize != self.n {
            if let Some(w) = x.iter().find(|&w| w >= self.n) {
                return Err(FrameError::WorldOutOfRange {
                    world: w,
                    n: self.n,
                });
            }
            return Err(FrameError::SizeMismatch {
                expected: self.n,
                found: x.n as usize,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// Components of the graph given by symmetric `rows`, by smallest world.
pub(crate) fn component_masks(rows: &[u64]) -> Vec<u64> {
    let mut seen = 0u64;
    let mut out = Vec::new();
    for start in 0..rows.len() {
        if seen >> start & 1 == 1 {
            continue;
        }
        let mut comp = 1u64 << start;
        loop {
            let mut grown = comp;
            let mut rest = comp;
            while rest != 0 {
                let w = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                grown |= rows[w];
            }
            if grown == comp {
                break;
            }
            comp = grown;
        }
        seen |= comp;
        out.push(comp);
    }
    out
}

/// The forcing condition checked literally:
/// `rm(i, l)` and `rq(i, j)` imply `rm(j, l)`.
pub fn forcing_holds(rq: &Relation, rm: &Relation) -> bool {
    forcing_witness(rq, rm).is_none()
}

fn forcing_witness(rq: &Relation, rm: &Relation) -> Option<(usize, usize, usize)> {
    forcing_violations(rq, rm).into_iter().next()
}

fn forcing_violations(rq: &Relation, rm: &Relation) -> Vec<(usize, usize, usize)> {
    let n = rq.n;
    let mut out = Vec::new();
    for i in 0..n {
        for l in 0..n {
            if !rm.contains(i, l) {
                continue;
            }
            for j in 0..n {
                if rq.contains(i, j) && !rm.contains(j, l) {
                    out.push((i, j, l));
                }
            }
        }
    }
    out
}

/// Forcing via components: every column of `rm` is a union of
/// `rq`-components. Requires `rq` to be reflexive and symmetric.
pub fn forcing_by_components(rq: &Relation, rm: &Relation) -> Result<bool, FrameError> {
    let components = rq.components()?;
    Ok((0..rm.n).all(|l| {
        let column = rm.column(l);
        components
            .iter()
            .all(|c| c.is_subset(&column) || c.intersection(&column).is_empty())
    }))
}

/// A failed clause of the structure definition together with its witness.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// `rq(world, world)` is missing.
    Reflexivity { world: usize },
    /// `rq(i, j)` holds but `rq(j, i)` does not.
    Symmetry { i: usize, j: usize },
    /// `rm(i, l)` and `rq(i, j)` hold but `rm(j, l)` does not.
    Forcing { i: usize, j: usize, l: usize },
    /// The atom's value differs from its bi-orthogonal closure.
    NotClosed { atom: Atom },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Reflexivity { world } => {
                write!(f, "reflexivity: rq({world},{world}) is missing")
            }
            Violation::Symmetry { i, j } => {
                write!(f, "symmetry: rq({i},{j}) holds but rq({j},{i}) does not")
            }
            Violation::Forcing { i, j, l } => write!(
                f,
                "forcing: rm({i},{l}) and rq({i},{j}) hold but rm({j},{l}) does not"
            ),
            Violation::NotClosed { atom } => {
                write!(f, "closedness: the value of '{atom}' is not rq-closed")
            }
        }
    }
}

/// A finite structure `(W, rq, rm, valuation)` with `W = 0..n`.
///
/// Construction only checks sizes; whether the quadruple is a quantum modal
/// structure is answered by [`Structure::validate`].
#[derive(Clone, PartialEq, Eq)]
pub struct Structure {
    n: usize,
    names: Option<Vec<String>>,
    rq: Relation,
    rm: Relation,
    valuation: BTreeMap<Atom, WorldSet>,
}

impl Structure {
    pub fn new(
        n: usize,
        rq: Relation,
        rm: Relation,
        valuation: BTreeMap<Atom, WorldSet>,
    ) -> Result<Self, FrameError> {
        if !(1..=MAX_WORLDS).contains(&n) {
            return Err(FrameError::WorldCount(n));
        }
        for size in [rq.n, rm.n]
            .into_iter()
            .chain(valuation.values().map(|v| v.n as usize))
        {
            if size != n {
                return Err(FrameError::SizeMismatch {
                    expected: n,
                    found: size,
                });
            }
        }
        Ok(Structure {
            n,
            names: None,
            rq,
            rm,
            valuation,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, FrameError> {
        if names.len() != self.n {
            return Err(FrameError::SizeMismatch {
                expected: self.n,
                found: names.len(),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn rq(&self) -> &Relation {
        &self.rq
    }

    pub fn rm(&self) -> &Relation {
        &self.rm
    }

    pub fn valuation(&self) -> &BTreeMap<Atom, WorldSet> {
        &self.valuation
    }

    pub fn value(&self, atom: &Atom) -> Option<WorldSet> {
        self.valuation.get(atom).copied()
    }

    /// Display name of a world; `w{i}` unless a name table was supplied.
    pub fn world_name(&self, i: usize) -> String {
        match &self.names {
            Some(names) => names[i].clone(),
            None => format!("w{i}"),
        }
    }

    pub fn world_names(&self) -> Vec<String> {
        (0..self.n).map(|i| self.world_name(i)).collect()
    }

    pub fn all_worlds(&self) -> WorldSet {
        WorldSet::full(self.n)
    }

    /// Every violated clause, in the order reflexivity, symmetry, forcing,
    /// closedness. Empty iff this is a quantum modal structure.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for i in 0..self.n {
            if !self.rq.contains(i, i) {
                out.push(Violation::Reflexivity { world: i });
            }
        }
        for i in 0..self.n {
            for j in 0..self.n {
                if self.rq.contains(i, j) && !self.rq.contains(j, i) {
                    out.push(Violation::Symmetry { i, j });
                }
            }
        }
        for (i, j, l) in forcing_violations(&self.rq, &self.rm) {
            out.push(Violation::Forcing { i, j, l });
        }
        for (atom, value) in &self.valuation {
            if !self.is_closed(value).unwrap_or(false) {
                out.push(Violation::NotClosed { atom: atom.clone() });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ortho(&self, x: &WorldSet) -> Result<WorldSet, FrameError> {
        self.rq.ortho(x)
    }

    pub fn biortho(&self, x: &WorldSet) -> Result<WorldSet, FrameError> {
        self.rq.biortho(x)
    }

    pub fn is_closed(&self, x: &WorldSet) -> Result<bool, FrameError> {
        self.rq.is_closed(x)
    }

    pub fn closed_sets(&self) -> Result<Vec<WorldSet>, FrameError> {
        self.rq.closed_sets()
    }

    pub fn rq_components(&self) -> Result<Vec<WorldSet>, FrameError> {
        self.rq.components()
    }

    pub fn forcing_holds(&self) -> bool {
        forcing_holds(&self.rq, &self.rm)
    }

    pub fn forcing_by_components(&self) -> Result<bool, FrameError> {
        forcing_by_components(&self.rq, &self.rm)
    }

    /// First forcing counterexample `(i, j, l)`, if any.
    pub fn forcing_witness(&self) -> Option<(usize, usize, usize)> {
        forcing_witness(&self.rq, &self.rm)
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Structure")
            .field("n", &self.n)
            .field("rq", &self.rq)
            .field("rm", &self.rm)
            .field("valuation", &self.valuation)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlethicError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("not a quantum modal structure: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// Structure with `rm := rq`. Valid only when `rq` is an equivalence
/// relation; otherwise the forcing violations are returned.
pub fn make_alethic(
    n: usize,
    rq: Relation,
    valuation: BTreeMap<Atom, WorldSet>,
) -> Result<Structure, AlethicError> {
    let s = Structure::new(n, rq.clone(), rq, valuation)?;
    let violations = s.validate();
    if violations.is_empty() {
        Ok(s)
    } else {
        Err(AlethicError::Invalid(violations))
    }
}
