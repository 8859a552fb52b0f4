//! Sequent calculus: sequents, the twelve rule schemas, derivation checking,
//! the explosion construction and a bounded backward proof search.
//!
//! Sequents are pairs of formula *sets*, and the schemas are matched with set
//! operations. Where a schema writes `a, G` the principal formula is removed
//! from the premise side before the result is compared, e.g. for `CUT` on `a`
//! the conclusion must be exactly
//! `(P1.left + (P2.left - {a}), (P1.right - {a}) + P2.right)`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::EntailmentQuery;
use crate::formula::{parse, Atom, Formula, ParseError};

#[derive(Debug, Error)]
pub enum CalculusError {
    #[error("unknown rule '{0}'")]
    UnknownRule(String),
    #[error("{rule} takes {expected} premise(s), got {found}")]
    Arity {
        rule: RuleName,
        expected: usize,
        found: usize,
    },
    #[error("{0} requires a formula parameter")]
    MissingParameter(RuleName),
    #[error("{0} takes no formula parameter")]
    UnexpectedParameter(RuleName),
    #[error("{rule}: parameter must be a conjunction, got {formula}")]
    NotAConjunction { rule: RuleName, formula: Formula },
    #[error("{0}")]
    Syntax(#[from] ParseError),
    #[error("sequent must contain exactly one '|-'")]
    SequentSeparator,
    #[error("{context}: {source}")]
    Formula { context: String, source: ParseError },
    #[error("malformed proof JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("conclusion mismatch: {0}")]
    ConclusionMismatch(String),
    #[error("input derivation does not check: {0}")]
    InvalidInput(String),
}

// ---------------------------------------------------------------------------
// Sequents

/// `left |- right` over finite formula sets.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequent {
    pub left: BTreeSet<Formula>,
    pub right: BTreeSet<Formula>,
}

impl Sequent {
    pub fn new(
        left: impl IntoIterator<Item = Formula>,
        right: impl IntoIterator<Item = Formula>,
    ) -> Self {
        Sequent {
            left: left.into_iter().collect(),
            right: right.into_iter().collect(),
        }
    }

    /// Parses `p & q, r |- s, ~t`. Either side may be empty; `⊢` is accepted
    /// for `|-`.
    pub fn parse(text: &str) -> Result<Self, CalculusError> {
        let normalized = text.replace('⊢', "|-");
        let mut parts = normalized.split("|-");
        let (Some(left), Some(right), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(CalculusError::SequentSeparator);
        };
        let right_offset = left.chars().count() + 2;
        Ok(Sequent {
            left: parse_side(left, "left", 0)?,
            right: parse_side(right, "right", right_offset)?,
        })
    }

    pub fn query(&self) -> EntailmentQuery {
        EntailmentQuery {
            gamma: self.left.clone(),
            delta: self.right.clone(),
        }
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.left.iter().chain(&self.right)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.formulas().flat_map(|f| f.atoms()).collect()
    }

    fn len(&self) -> usize {
        self.left.len() + self.right.len()
    }
}

fn parse_side(text: &str, side: &str, offset: usize) -> Result<BTreeSet<Formula>, CalculusError> {
    let mut out = BTreeSet::new();
    if text.trim().is_empty() {
        return Ok(out);
    }
    let mut column = offset;
    for (k, item) in text.split(',').enumerate() {
        let f = parse(item).map_err(|e| CalculusError::Formula {
            context: format!("{side} formula {}", k + 1),
            source: ParseError {
                column: e.column + column,
                ..e
            },
        })?;
        out.insert(f);
        column += item.chars().count() + 1;
    }
    Ok(out)
}

fn join(formulas: &BTreeSet<Formula>) -> String {
    formulas
        .iter()
        .map(|f| f.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left = join(&self.left);
        let right = join(&self.right);
        match (left.is_empty(), right.is_empty()) {
            (true, true) => f.write_str("|-"),
            (true, false) => write!(f, "|- {right}"),
            (false, true) => write!(f, "{left} |-"),
            (false, false) => write!(f, "{left} |- {right}"),
        }
    }
}

impl fmt::Debug for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequent({self})")
    }
}

impl FromStr for Sequent {
    type Err = CalculusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sequent::parse(s)
    }
}

// ---------------------------------------------------------------------------
// Rules

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleName {
    Ax,
    Mem,
    Wkn,
    Cut,
    AndL1,
    AndL2,
    AndR,
    NegL,
    NegR,
    NegNegL,
    NegNegR,
    K,
}

impl RuleName {
    pub const ALL: [RuleName; 12] = [
        RuleName::Ax,
        RuleName::Mem,
        RuleName::Wkn,
        RuleName::Cut,
        RuleName::AndL1,
        RuleName::AndL2,
        RuleName::AndR,
        RuleName::NegL,
        RuleName::NegR,
        RuleName::NegNegL,
        RuleName::NegNegR,
        RuleName::K,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleName::Ax => "AX",
            RuleName::Mem => "MEM",
            RuleName::Wkn => "WKN",
            RuleName::Cut => "CUT",
            RuleName::AndL1 => "AND_L1",
            RuleName::AndL2 => "AND_L2",
            RuleName::AndR => "AND_R",
            RuleName::NegL => "NEG_L",
            RuleName::NegR => "NEG_R",
            RuleName::NegNegL => "NEGNEG_L",
            RuleName::NegNegR => "NEGNEG_R",
            RuleName::K => "K",
        }
    }

    /// Number of premises.
    pub fn arity(self) -> usize {
        match self {
            RuleName::Ax | RuleName::Mem => 0,
            RuleName::Cut | RuleName::AndR => 2,
            _ => 1,
        }
    }

    pub fn takes_parameter(self) -> bool {
        matches!(
            self,
            RuleName::Mem
                | RuleName::Cut
                | RuleName::AndL1
                | RuleName::AndL2
                | RuleName::NegL
                | RuleName::NegNegL
                | RuleName::NegNegR
        )
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleName {
    type Err = CalculusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleName::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| CalculusError::UnknownRule(s.to_string()))
    }
}

/// A rule together with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Ax,
    /// `G |- []a, ~[]a`
    Mem(Formula),
    Wkn,
    /// cut formula
    Cut(Formula),
    /// conjuncts `(a, b)`; the premise carries `a`
    AndL1(Formula, Formula),
    /// conjuncts `(a, b)`; the premise carries `b`
    AndL2(Formula, Formula),
    AndR,
    NegL(Formula),
    NegR,
    NegNegL(Formula),
    NegNegR(Formula),
    K,
}

impl Rule {
    pub fn name(&self) -> RuleName {
        match self {
            Rule::Ax => RuleName::Ax,
            Rule::Mem(_) => RuleName::Mem,
            Rule::Wkn => RuleName::Wkn,
            Rule::Cut(_) => RuleName::Cut,
            Rule::AndL1(..) => RuleName::AndL1,
            Rule::AndL2(..) => RuleName::AndL2,
            Rule::AndR => RuleName::AndR,
            Rule::NegL(_) => RuleName::NegL,
            Rule::NegR => RuleName::NegR,
            Rule::NegNegL(_) => RuleName::NegNegL,
            Rule::NegNegR(_) => RuleName::NegNegR,
            Rule::K => RuleName::K,
        }
    }

    pub fn arity(&self) -> usize {
        self.name().arity()
    }

    /// The parameter as written in proof files. For `AND_L1`/`AND_L2` it is
    /// the principal conjunction, which carries both conjuncts.
    pub fn parameter(&self) -> Option<Formula> {
        match self {
            Rule::Mem(a) | Rule::Cut(a) | Rule::NegL(a) | Rule::NegNegL(a) | Rule::NegNegR(a) => {
                Some(a.clone())
            }
            Rule::AndL1(a, b) | Rule::AndL2(a, b) => Some(Formula::and(a.clone(), b.clone())),
            _ => None,
        }
    }

    pub fn from_parts(name: RuleName, parameter: Option<Formula>) -> Result<Rule, CalculusError> {
        if !name.takes_parameter() {
            if parameter.is_some() {
                return Err(CalculusError::UnexpectedParameter(name));
            }
            return Ok(match name {
                RuleName::Ax => Rule::Ax,
                RuleName::Wkn => Rule::Wkn,
                RuleName::AndR => Rule::AndR,
                RuleName::NegR => Rule::NegR,
                RuleName::K => Rule::K,
                _ => unreachable!(),
            });
        }
        let a = parameter.ok_or(CalculusError::MissingParameter(name))?;
        Ok(match name {
            RuleName::Mem => Rule::Mem(a),
            RuleName::Cut => Rule::Cut(a),
            RuleName::NegL => Rule::NegL(a),
            RuleName::NegNegL => Rule::NegNegL(a),
            RuleName::NegNegR => Rule::NegNegR(a),
            RuleName::AndL1 | RuleName::AndL2 => {
                let Formula::And(x, y) = &a else {
                    return Err(CalculusError::NotAConjunction {
                        rule: name,
                        formula: a,
                    });
                };
                let (x, y) = ((**x).clone(), (**y).clone());
                if name == RuleName::AndL1 {
                    Rule::AndL1(x, y)
                } else {
                    Rule::AndL2(x, y)
                }
            }
            _ => unreachable!(),
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parameter() {
            Some(p) => write!(f, "{} {}", self.name(), p),
            None => write!(f, "{}", self.name()),
        }
    }
}

fn without(set: &BTreeSet<Formula>, f: &Formula) -> BTreeSet<Formula> {
    let mut out = set.clone();
    out.remove(f);
    out
}

fn with(set: &BTreeSet<Formula>, f: Formula) -> BTreeSet<Formula> {
    let mut out = set.clone();
    out.insert(f);
    out
}

fn union(a: &BTreeSet<Formula>, b: &BTreeSet<Formula>) -> BTreeSet<Formula> {
    a.union(b).cloned().collect()
}

fn expect_sequent(
    conclusion: &Sequent,
    left: BTreeSet<Formula>,
    right: BTreeSet<Formula>,
    rule: &str,
) -> Option<String> {
    let expected = Sequent { left, right };
    (*conclusion != expected)
        .then(|| format!("{rule} yields '{expected}' here, not '{conclusion}'"))
}

/// Why `conclusion` does not follow from `premises` by `rule`, or `None` when
/// it does. Fails with an error on an arity mismatch.
pub fn explain_rule(
    conclusion: &Sequent,
    rule: &Rule,
    premises: &[Sequent],
) -> Result<Option<String>, CalculusError> {
    if premises.len() != rule.arity() {
        return Err(CalculusError::Arity {
            rule: rule.name(),
            expected: rule.arity(),
            found: premises.len(),
        });
    }
    let c = conclusion;
    let reason = match rule {
        Rule::Ax => (c.left.len() != 1 || c.left != c.right)
            .then(|| "AX requires identical singleton sides".to_string()),
        Rule::Mem(a) => {
            let boxed = Formula::boxed(a.clone());
            let expected: BTreeSet<_> = [boxed.clone(), Formula::not(boxed)].into();
            (c.right != expected)
                .then(|| format!("MEM requires matching α: succedent must be exactly {{[]{a}, ~[]{a}}} written with the parameter", a = paren(a)))
        }
        Rule::Wkn => {
            let p = &premises[0];
            (!p.left.is_subset(&c.left) || !p.right.is_subset(&c.right))
                .then(|| "WKN may only add formulas to the premise".to_string())
        }
        Rule::Cut(a) => {
            let (p1, p2) = (&premises[0], &premises[1]);
            if !p1.right.contains(a) {
                Some(format!(
                    "CUT formula {a} missing from the right of the first premise"
                ))
            } else if !p2.left.contains(a) {
                Some(format!(
                    "CUT formula {a} missing from the left of the second premise"
                ))
            } else {
                expect_sequent(
                    c,
                    union(&p1.left, &without(&p2.left, a)),
                    union(&without(&p1.right, a), &p2.right),
                    "CUT",
                )
            }
        }
        Rule::AndL1(a, b) | Rule::AndL2(a, b) => {
            let p = &premises[0];
            let (name, side) = match rule {
                Rule::AndL1(..) => ("AND_L1", a),
                _ => ("AND_L2", b),
            };
            if !p.left.contains(side) {
                Some(format!("{name} needs {side} on the left of the premise"))
            } else {
                expect_sequent(
                    c,
                    with(&without(&p.left, side), Formula::and(a.clone(), b.clone())),
                    p.right.clone(),
                    name,
                )
            }
        }
        Rule::AndR => check_and_r(c, &premises[0], &premises[1]),
        Rule::NegL(a) => {
            let p = &premises[0];
            if !p.right.contains(a) {
                Some(format!("NEG_L needs {a} on the right of the premise"))
            } else {
                expect_sequent(
                    c,
                    with(&p.left, Formula::not(a.clone())),
                    without(&p.right, a),
                    "NEG_L",
                )
            }
        }
        Rule::NegR => {
            let p = &premises[0];
            match p.left.iter().next() {
                Some(a) if p.left.len() == 1 => expect_sequent(
                    c,
                    p.right.iter().map(|d| Formula::not(d.clone())).collect(),
                    [Formula::not(a.clone())].into(),
                    "NEG_R",
                ),
                _ => Some("NEG_R needs exactly one formula on the left of the premise".into()),
            }
        }
        Rule::NegNegL(a) => {
            let p = &premises[0];
            if !p.left.contains(a) {
                Some(format!("NEGNEG_L needs {a} on the left of the premise"))
            } else {
                expect_sequent(
                    c,
                    with(&without(&p.left, a), Formula::not(Formula::not(a.clone()))),
                    p.right.clone(),
                    "NEGNEG_L",
                )
            }
        }
        Rule::NegNegR(a) => {
            let p = &premises[0];
            if !p.right.contains(a) {
                Some(format!("NEGNEG_R needs {a} on the right of the premise"))
            } else {
                expect_sequent(
                    c,
                    p.left.clone(),
                    with(&without(&p.right, a), Formula::not(Formula::not(a.clone()))),
                    "NEGNEG_R",
                )
            }
        }
        Rule::K => {
            let p = &premises[0];
            match p.right.iter().next() {
                Some(a) if p.right.len() == 1 => expect_sequent(
                    c,
                    p.left.iter().map(|g| Formula::boxed(g.clone())).collect(),
                    [Formula::boxed(a.clone())].into(),
                    "K",
                ),
                _ => Some("K needs exactly one formula on the right of the premise".into()),
            }
        }
    };
    Ok(reason)
}

fn paren(f: &Formula) -> String {
    match f {
        Formula::And(..) => format!("({f})"),
        _ => f.to_string(),
    }
}

fn check_and_r(c: &Sequent, p1: &Sequent, p2: &Sequent) -> Option<String> {
    if p1.left != c.left || p2.left != c.left {
        return Some("AND_R premises must share the conclusion's left side".into());
    }
    let fits = c.right.iter().any(|f| {
        let Formula::And(a, b) = f else {
            return false;
        };
        if !p1.right.contains(&**a) || !p2.right.contains(&**b) {
            return false;
        }
        let delta = without(&p1.right, a);
        delta == without(&p2.right, b) && c.right == with(&delta, f.clone())
    });
    (!fits).then(|| "AND_R: no conjunction on the right matches the premises".into())
}

/// Whether `conclusion` follows from `premises` by `rule`.
pub fn check_rule(
    conclusion: &Sequent,
    rule: &Rule,
    premises: &[Sequent],
) -> Result<bool, CalculusError> {
    Ok(explain_rule(conclusion, rule, premises)?.is_none())
}

// ---------------------------------------------------------------------------
// Derivations

/// A derivation tree; leaves are axiom instances.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub conclusion: Sequent,
    pub rule: Rule,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn new(conclusion: Sequent, rule: Rule, premises: Vec<Derivation>) -> Self {
        Derivation {
            conclusion,
            rule,
            premises,
        }
    }

    pub fn leaf(conclusion: Sequent, rule: Rule) -> Self {
        Derivation::new(conclusion, rule, Vec::new())
    }

    /// Height of the tree; a single axiom has height 1.
    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(|p| p.height()).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(|p| p.node_count()).sum::<usize>()
    }

    /// All nodes, premises before conclusions, left to right.
    pub fn nodes(&self) -> Vec<&Derivation> {
        let mut out = Vec::new();
        self.collect_nodes(&mut out);
        out
    }

    fn collect_nodes<'a>(&'a self, out: &mut Vec<&'a Derivation>) {
        for p in &self.premises {
            p.collect_nodes(out);
        }
        out.push(self);
    }

    pub fn rules_used(&self) -> BTreeSet<RuleName> {
        self.nodes().into_iter().map(|d| d.rule.name()).collect()
    }

    pub fn premise_sequents(&self) -> Vec<Sequent> {
        self.premises.iter().map(|p| p.conclusion.clone()).collect()
    }

    /// Indented rendering, conclusion first.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, indent: usize, out: &mut String) {
        out.push_str(&format!(
            "{:indent$}{}    [{}]\n",
            "",
            self.conclusion,
            self.rule,
            indent = indent
        ));
        for p in &self.premises {
            p.render_into(indent + 2, out);
        }
    }
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Location and cause of the first failing node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    /// Premise indices from the root down to the failing node.
    pub path: Vec<usize>,
    pub conclusion: Sequent,
    pub rule: RuleName,
    pub reason: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "node [{}] '{}' by {}: {}",
            path.join(","),
            self.conclusion,
            self.rule,
            self.reason
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Failed(Failure),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

/// Checks every node, premises before conclusions and left to right, and
/// reports the first failure in that order.
pub fn check_derivation(d: &Derivation) -> Verdict {
    let mut path = Vec::new();
    match first_failure(d, &mut path) {
        Some(f) => Verdict::Failed(f),
        None => Verdict::Ok,
    }
}

fn first_failure(d: &Derivation, path: &mut Vec<usize>) -> Option<Failure> {
    for (k, p) in d.premises.iter().enumerate() {
        path.push(k);
        let found = first_failure(p, path);
        path.pop();
        if found.is_some() {
            return found;
        }
    }
    let reason = match explain_rule(&d.conclusion, &d.rule, &d.premise_sequents()) {
        Ok(None) => return None,
        Ok(Some(reason)) => reason,
        Err(e) => e.to_string(),
    };
    Some(Failure {
        path: path.clone(),
        conclusion: d.conclusion.clone(),
        rule: d.rule.name(),
        reason,
    })
}

/// From derivations of `G |- a` and `G |- ~a`, builds `G |- delta`:
///
/// ```text
///               G |- a
///             ---------- NEG_L a
/// G |- ~a     ~a, G |-
/// -------------------- CUT ~a
///        G |-
///      -------- WKN
///      G |- delta
/// ```
pub fn explosion(
    positive: &Derivation,
    negative: &Derivation,
    delta: &Formula,
) -> Result<Derivation, CalculusError> {
    for d in [positive, negative] {
        if let Verdict::Failed(f) = check_derivation(d) {
            return Err(CalculusError::InvalidInput(f.to_string()));
        }
    }
    let gamma = &positive.conclusion.left;
    if negative.conclusion.left != *gamma {
        return Err(CalculusError::ConclusionMismatch(format!(
            "'{}' and '{}' have different left sides",
            positive.conclusion, negative.conclusion
        )));
    }
    let alpha = match positive.conclusion.right.iter().collect::<Vec<_>>()[..] {
        [a] => a.clone(),
        _ => {
            return Err(CalculusError::ConclusionMismatch(format!(
                "'{}' must have exactly one formula on the right",
                positive.conclusion
            )))
        }
    };
    let negated = Formula::not(alpha.clone());
    if negative.conclusion.right != BTreeSet::from([negated.clone()]) {
        return Err(CalculusError::ConclusionMismatch(format!(
            "'{}' must have exactly {negated} on the right",
            negative.conclusion
        )));
    }
    let neg_l = Derivation::new(
        Sequent {
            left: with(gamma, negated.clone()),
            right: BTreeSet::new(),
        },
        Rule::NegL(alpha),
        vec![positive.clone()],
    );
    let cut = Derivation::new(
        Sequent {
            left: gamma.clone(),
            right: BTreeSet::new(),
        },
        Rule::Cut(negated),
        vec![negative.clone(), neg_l],
    );
    Ok(Derivation::new(
        Sequent {
            left: gamma.clone(),
            right: [delta.clone()].into(),
        },
        Rule::Wkn,
        vec![cut],
    ))
}

// ---------------------------------------------------------------------------
// Proof search

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutPolicy {
    /// Never cut.
    None,
    /// Cut only on subformulas of the goal and their negations.
    #[default]
    Analytic,
    /// Additionally cut on boxes, negated boxes and pairwise conjunctions of
    /// goal subformulas. Terminates only through the depth bound.
    Full,
}

impl FromStr for CutPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(CutPolicy::None),
            "analytic" => Ok(CutPolicy::Analytic),
            "full" => Ok(CutPolicy::Full),
            other => Err(format!("unknown cut policy '{other}'")),
        }
    }
}

/// Sequents with more formulas than this only get targeted weakenings
/// instead of every sub-sequent.
const WKN_SUBSET_LIMIT: usize = 8;

struct Prover {
    cut_formulas: Vec<Formula>,
    // largest depth at which (goal, allow_wkn) is known to fail
    failed: HashMap<(Sequent, bool), usize>,
}

/// Iterative-deepening backward search for a derivation of `goal` with
/// height at most `depth_limit`. Every returned derivation passes
/// [`check_derivation`]; `None` says nothing about validity.
pub fn search_proof(goal: &Sequent, depth_limit: usize, cut: CutPolicy) -> Option<Derivation> {
    let mut prover = Prover {
        cut_formulas: cut_candidates(goal, cut),
        failed: HashMap::new(),
    };
    for depth in 1..=depth_limit {
        if let Some(d) = prover.prove(goal, depth, true) {
            debug_assert!(check_derivation(&d).is_ok());
            return Some(d);
        }
    }
    None
}

fn cut_candidates(goal: &Sequent, policy: CutPolicy) -> Vec<Formula> {
    if policy == CutPolicy::None {
        return Vec::new();
    }
    let subs: BTreeSet<Formula> = goal.formulas().flat_map(|f| f.subformulas()).collect();
    let mut out: BTreeSet<Formula> = subs.clone();
    out.extend(subs.iter().map(|f| Formula::not(f.clone())));
    if policy == CutPolicy::Full {
        for s in &subs {
            out.insert(Formula::boxed(s.clone()));
            out.insert(Formula::not(Formula::boxed(s.clone())));
            for t in &subs {
                out.insert(Formula::and(s.clone(), t.clone()));
            }
        }
    }
    out.into_iter().collect()
}

impl Prover {
    fn prove(&mut self, goal: &Sequent, depth: usize, allow_wkn: bool) -> Option<Derivation> {
        if depth == 0 {
            return None;
        }
        let key = (goal.clone(), allow_wkn);
        if self.failed.get(&key).is_some_and(|&d| d >= depth) {
            return None;
        }
        let found = self.try_rules(goal, depth, allow_wkn);
        if found.is_none() {
            let entry = self.failed.entry(key).or_insert(0);
            *entry = (*entry).max(depth);
        }
        found
    }

    fn try_rules(&mut self, goal: &Sequent, depth: usize, allow_wkn: bool) -> Option<Derivation> {
        if let Some(axiom) = axiom_for(goal) {
            return Some(axiom);
        }
        if depth == 1 {
            return None;
        }
        for (rule, premises) in self.candidates(goal) {
            if !check_rule(goal, &rule, &premises).unwrap_or(false) {
                continue;
            }
            if let Some(ds) = self.prove_all(&premises, depth - 1) {
                return Some(Derivation::new(goal.clone(), rule, ds));
            }
        }
        if allow_wkn {
            for premise in weakening_premises(goal) {
                if let Some(d) = self.prove(&premise, depth - 1, false) {
                    return Some(Derivation::new(goal.clone(), Rule::Wkn, vec![d]));
                }
            }
        }
        None
    }

    fn prove_all(&mut self, premises: &[Sequent], depth: usize) -> Option<Vec<Derivation>> {
        premises
            .iter()
            .map(|p| self.prove(p, depth, true))
            .collect()
    }

    /// Backward instances of every non-structural rule, in a fixed order.
    fn candidates(&self, goal: &Sequent) -> Vec<(Rule, Vec<Sequent>)> {
        let (l, r) = (&goal.left, &goal.right);
        let mut out = Vec::new();

        // K: []G |- []a
        if let [Formula::Box(a)] = r.iter().collect::<Vec<_>>()[..] {
            let inner: Option<BTreeSet<Formula>> = l
                .iter()
                .map(|g| match g {
                    Formula::Box(x) => Some((**x).clone()),
                    _ => None,
                })
                .collect();
            if let Some(inner) = inner {
                out.push((
                    Rule::K,
                    vec![Sequent {
                        left: inner,
                        right: [(**a).clone()].into(),
                    }],
                ));
            }
        }
        // NEG_R: ~D |- ~a
        if let [Formula::Not(a)] = r.iter().collect::<Vec<_>>()[..] {
            let inner: Option<BTreeSet<Formula>> = l
                .iter()
                .map(|g| match g {
                    Formula::Not(x) => Some((**x).clone()),
                    _ => None,
                })
                .collect();
            if let Some(inner) = inner {
                out.push((
                    Rule::NegR,
                    vec![Sequent {
                        left: [(**a).clone()].into(),
                        right: inner,
                    }],
                ));
            }
        }
        for f in l {
            match f {
                Formula::Not(x) => {
                    if let Formula::Not(a) = &**x {
                        let a = (**a).clone();
                        out.push((
                            Rule::NegNegL(a.clone()),
                            vec![Sequent {
                                left: with(&without(l, f), a),
                                right: r.clone(),
                            }],
                        ));
                    }
                }
                Formula::And(a, b) => {
                    let (a, b) = ((**a).clone(), (**b).clone());
                    out.push((
                        Rule::AndL1(a.clone(), b.clone()),
                        vec![Sequent {
                            left: with(&without(l, f), a.clone()),
                            right: r.clone(),
                        }],
                    ));
                    out.push((
                        Rule::AndL2(a, b.clone()),
                        vec![Sequent {
                            left: with(&without(l, f), b),
                            right: r.clone(),
                        }],
                    ));
                }
                _ => {}
            }
        }
        for f in r {
            match f {
                Formula::Not(x) => {
                    if let Formula::Not(a) = &**x {
                        let a = (**a).clone();
                        out.push((
                            Rule::NegNegR(a.clone()),
                            vec![Sequent {
                                left: l.clone(),
                                right: with(&without(r, f), a),
                            }],
                        ));
                    }
                }
                Formula::And(a, b) => {
                    let rest = without(r, f);
                    out.push((
                        Rule::AndR,
                        vec![
                            Sequent {
                                left: l.clone(),
                                right: with(&rest, (**a).clone()),
                            },
                            Sequent {
                                left: l.clone(),
                                right: with(&rest, (**b).clone()),
                            },
                        ],
                    ));
                }
                _ => {}
            }
        }
        for f in l {
            if let Formula::Not(a) = f {
                out.push((
                    Rule::NegL((**a).clone()),
                    vec![Sequent {
                        left: without(l, f),
                        right: with(r, (**a).clone()),
                    }],
                ));
            }
        }
        for c in &self.cut_formulas {
            if l.contains(c) || r.contains(c) {
                continue;
            }
            out.push((
                Rule::Cut(c.clone()),
                vec![
                    Sequent {
                        left: l.clone(),
                        right: with(r, c.clone()),
                    },
                    Sequent {
                        left: with(l, c.clone()),
                        right: r.clone(),
                    },
                ],
            ));
        }
        out
    }
}

fn axiom_for(goal: &Sequent) -> Option<Derivation> {
    if goal.left.len() == 1 && goal.left == goal.right {
        return Some(Derivation::leaf(goal.clone(), Rule::Ax));
    }
    mem_parameter(&goal.right).map(|a| Derivation::leaf(goal.clone(), Rule::Mem(a)))
}

fn mem_parameter(right: &BTreeSet<Formula>) -> Option<Formula> {
    if right.len() != 2 {
        return None;
    }
    right.iter().find_map(|f| match f {
        Formula::Box(a) if right.contains(&Formula::not(f.clone())) => Some((**a).clone()),
        _ => None,
    })
}

/// Proper sub-sequents of `goal`, smallest first. Large goals only get the
/// shapes the axioms, `K` and `NEG_R` can close.
fn weakening_premises(goal: &Sequent) -> Vec<Sequent> {
    let formulas: Vec<(bool, &Formula)> = goal
        .left
        .iter()
        .map(|f| (true, f))
        .chain(goal.right.iter().map(|f| (false, f)))
        .collect();
    let k = formulas.len();
    if k <= WKN_SUBSET_LIMIT {
        let mut masks: Vec<u32> = (0..(1u32 << k) - 1).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        return masks
            .into_iter()
            .map(|m| {
                let mut s = Sequent::default();
                for (i, (is_left, f)) in formulas.iter().enumerate() {
                    if m >> i & 1 == 1 {
                        if *is_left {
                            s.left.insert((*f).clone());
                        } else {
                            s.right.insert((*f).clone());
                        }
                    }
                }
                s
            })
            .collect();
    }
    let mut out = BTreeSet::new();
    for f in goal.left.intersection(&goal.right) {
        out.insert(Sequent::new([f.clone()], [f.clone()]));
    }
    for f in &goal.right {
        if let Formula::Box(_) = f {
            if goal.right.contains(&Formula::not(f.clone())) {
                out.insert(Sequent::new([], [f.clone(), Formula::not(f.clone())]));
            }
            let boxes = goal.left.iter().filter(|g| matches!(g, Formula::Box(_)));
            out.insert(Sequent::new(boxes.cloned(), [f.clone()]));
        }
        if let Formula::Not(_) = f {
            let negs = goal.left.iter().filter(|g| matches!(g, Formula::Not(_)));
            out.insert(Sequent::new(negs.cloned(), [f.clone()]));
        }
        out.insert(Sequent {
            left: goal.left.clone(),
            right: [f.clone()].into(),
        });
    }
    out.insert(Sequent {
        left: goal.left.clone(),
        right: BTreeSet::new(),
    });
    out.remove(goal);
    let mut out: Vec<Sequent> = out.into_iter().collect();
    out.sort_by_key(|s| s.len());
    out
}

// ---------------------------------------------------------------------------
// Proof files

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequentJson {
    #[serde(default)]
    pub left: Vec<String>,
    #[serde(default)]
    pub right: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofNode {
    pub conclusion: SequentJson,
    pub rule: RuleJson,
    #[serde(default)]
    pub premises: Vec<ProofNode>,
}

/// Top-level proof document: a node plus an optional `"format": 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<u32>,
    #[serde(flatten)]
    pub root: ProofNode,
}

fn parse_in(text: &str, context: impl FnOnce() -> String) -> Result<Formula, CalculusError> {
    parse(text).map_err(|source| CalculusError::Formula {
        context: context(),
        source,
    })
}

impl ProofNode {
    fn to_derivation(&self, path: &mut Vec<usize>) -> Result<Derivation, CalculusError> {
        let at = |path: &[usize]| {
            let p: Vec<String> = path.iter().map(|i| i.to_string()).collect();
            format!("node [{}]", p.join(","))
        };
        let side = |items: &[String], which: &str, path: &[usize]| {
            items
                .iter()
                .enumerate()
                .map(|(k, t)| parse_in(t, || format!("{} {which} formula {}", at(path), k + 1)))
                .collect::<Result<BTreeSet<_>, _>>()
        };
        let conclusion = Sequent {
            left: side(&self.conclusion.left, "left", path)?,
            right: side(&self.conclusion.right, "right", path)?,
        };
        let name: RuleName = self.rule.name.parse()?;
        let parameter = match &self.rule.formula {
            Some(t) => Some(parse_in(t, || format!("{} rule formula", at(path)))?),
            None => None,
        };
        let rule = Rule::from_parts(name, parameter)?;
        let mut premises = Vec::with_capacity(self.premises.len());
        for (k, p) in self.premises.iter().enumerate() {
            path.push(k);
            premises.push(p.to_derivation(path)?);
            path.pop();
        }
        Ok(Derivation::new(conclusion, rule, premises))
    }

    fn from_derivation(d: &Derivation) -> Self {
        let strings = |s: &BTreeSet<Formula>| s.iter().map(|f| f.to_string()).collect();
        ProofNode {
            conclusion: SequentJson {
                left: strings(&d.conclusion.left),
                right: strings(&d.conclusion.right),
            },
            rule: RuleJson {
                name: d.rule.name().to_string(),
                formula: d.rule.parameter().map(|f| f.to_string()),
            },
            premises: d.premises.iter().map(ProofNode::from_derivation).collect(),
        }
    }
}

impl Derivation {
    /// Reads a proof document. Premise-count mismatches are not errors here;
    /// they surface in [`check_derivation`].
    pub fn from_json(text: &str) -> Result<Derivation, CalculusError> {
        let file: ProofFile = serde_json::from_str(text)?;
        file.root.to_derivation(&mut Vec::new())
    }

    pub fn to_proof_file(&self) -> ProofFile {
        ProofFile {
            format: Some(1),
            root: ProofNode::from_derivation(self),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_proof_file()).expect("serialisable")
    }
}
