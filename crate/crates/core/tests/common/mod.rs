//! Reference implementations on plain boolean matrices. Slow on purpose and
//! independent of the bitmask code in the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

use qmlkit::{Formula, Relation, Structure, WorldSet};

pub type Matrix = Vec<Vec<bool>>;

pub fn matrix(r: &Relation) -> Matrix {
    let n = r.size();
    (0..n)
        .map(|i| (0..n).map(|j| r.contains(i, j)).collect())
        .collect()
}

pub fn bools(set: &WorldSet) -> Vec<bool> {
    (0..set.universe_size()).map(|i| set.contains(i)).collect()
}

pub fn matrix_from_bits(n: usize, bits: u64) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| bits >> (i * n + j) & 1 == 1).collect())
        .collect()
}

pub fn subset_from_bits(n: usize, bits: u64) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

/// `{j | no k in x with rq(j, k)}`
pub fn ortho(rq: &Matrix, x: &[bool]) -> Vec<bool> {
    let n = rq.len();
    (0..n)
        .map(|j| (0..n).all(|k| !(x[k] && rq[j][k])))
        .collect()
}

pub fn is_closed(rq: &Matrix, x: &[bool]) -> bool {
    ortho(rq, &ortho(rq, x)) == x
}

pub fn is_reflexive(r: &Matrix) -> bool {
    (0..r.len()).all(|i| r[i][i])
}

pub fn is_symmetric(r: &Matrix) -> bool {
    let n = r.len();
    (0..n).all(|i| (0..n).all(|j| r[i][j] == r[j][i]))
}

pub fn is_transitive(r: &Matrix) -> bool {
    let n = r.len();
    (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| !(r[i][j] && r[j][k]) || r[i][k])))
}

/// `rm(i, l)` and `rq(i, j)` imply `rm(j, l)`, checked triple by triple.
pub fn forcing(rq: &Matrix, rm: &Matrix) -> bool {
    let n = rq.len();
    (0..n).all(|i| (0..n).all(|j| (0..n).all(|l| !(rm[i][l] && rq[i][j]) || rm[j][l])))
}

/// Truth clauses evaluated world by world.
pub fn holds(
    rq: &Matrix,
    rm: &Matrix,
    val: &BTreeMap<String, Vec<bool>>,
    i: usize,
    f: &Formula,
) -> bool {
    let n = rq.len();
    match f {
        Formula::Atom(a) => val[a.as_str()][i],
        Formula::And(a, b) => holds(rq, rm, val, i, a) && holds(rq, rm, val, i, b),
        Formula::Not(a) => (0..n).all(|j| !rq[i][j] || !holds(rq, rm, val, j, a)),
        Formula::Box(a) => (0..n).all(|l| !rm[i][l] || holds(rq, rm, val, l, a)),
    }
}

pub struct Plain {
    pub rq: Matrix,
    pub rm: Matrix,
    pub val: BTreeMap<String, Vec<bool>>,
}

impl Plain {
    pub fn of(s: &Structure) -> Self {
        Plain {
            rq: matrix(s.rq()),
            rm: matrix(s.rm()),
            val: s
                .valuation()
                .iter()
                .map(|(a, set)| (a.to_string(), bools(set)))
                .collect(),
        }
    }

    pub fn holds(&self, i: usize, f: &Formula) -> bool {
        holds(&self.rq, &self.rm, &self.val, i, f)
    }

    pub fn truth(&self, f: &Formula) -> Vec<bool> {
        (0..self.rq.len()).map(|i| self.holds(i, f)).collect()
    }
}

/// Number of quantum modal structures on `n` worlds with `atoms` atoms:
/// every raw relation pair and valuation, filtered with the literal
/// definitions.
pub fn naive_count_literal(n: usize, atoms: u32) -> u64 {
    let cells = n * n;
    let mut total = 0;
    for rq_bits in 0..1u64 << cells {
        let rq = matrix_from_bits(n, rq_bits);
        if !is_reflexive(&rq) || !is_symmetric(&rq) {
            continue;
        }
        for rm_bits in 0..1u64 << cells {
            if !forcing(&rq, &matrix_from_bits(n, rm_bits)) {
                continue;
            }
            for vals in 0..1u64 << (n as u32 * atoms) {
                let ok = (0..atoms).all(|a| {
                    let x = vals >> (a as usize * n) & ((1 << n) - 1);
                    is_closed(&rq, &subset_from_bits(n, x))
                });
                if ok {
                    total += 1;
                }
            }
        }
    }
    total
}
