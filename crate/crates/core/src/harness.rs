//! Golden derivation corpus and the soundness cross-check.
//!
//! Each corpus derivation must pass the checker, and its conclusion must
//! survive [`refute_entailment`]. Every node is also checked under the
//! world-wise reading: no single world may satisfy the node's left side
//! while falsifying all of its right side.

use std::collections::BTreeSet;

use crate::calculus::{check_derivation, CalculusError, Derivation, RuleName, Sequent, Verdict};
use crate::eval::Program;
use crate::formula::{Atom, Formula};
use crate::frame::full_mask;
use crate::search::{refute_entailment, scan, Countermodel, Refutation, SearchBudget, SearchError};

macro_rules! corpus_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name, ".json")))),*]
    };
}

/// `(name, proof JSON)` pairs shipped with the crate.
pub const CORPUS_FILES: &[(&str, &str)] = corpus_files![
    "box_conjunction_intro",
    "box_conjunction_left",
    "box_double_negation",
    "box_necessitation",
    "conjunction_commutes",
    "conjunction_intro",
    "conjunction_left",
    "conjunction_right_projection",
    "contradiction",
    "cut_conjunction_double_negation",
    "cut_under_box",
    "diamond_of_box_negation",
    "disjunction_intro",
    "double_negation_elim",
    "double_negation_intro",
    "explosion_atoms",
    "explosion_box",
    "explosion_conjunction",
    "identity_atom",
    "identity_box",
    "mem_double_negation",
    "negation_antitone",
    "non_contradiction",
    "weakening",
];

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub derivation: Derivation,
}

/// Parses the shipped corpus.
pub fn corpus() -> Result<Vec<CorpusEntry>, CalculusError> {
    CORPUS_FILES
        .iter()
        .map(|(name, text)| {
            Ok(CorpusEntry {
                name: name.to_string(),
                derivation: Derivation::from_json(text)?,
            })
        })
        .collect()
}

/// A node whose sequent fails at a single world.
#[derive(Debug, Clone)]
pub struct NodeCounterexample {
    pub path: Vec<usize>,
    pub sequent: Sequent,
    pub countermodel: Countermodel,
}

#[derive(Debug, Clone)]
pub struct EntryReport {
    pub name: String,
    pub conclusion: Sequent,
    pub rules: BTreeSet<RuleName>,
    pub verdict: Verdict,
    pub refutation: Option<Refutation>,
    pub node_counterexample: Option<NodeCounterexample>,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.verdict.is_ok() && self.refutation.is_none() && self.node_counterexample.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct SoundnessReport {
    pub entries: Vec<EntryReport>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed())
    }

    pub fn rules_covered(&self) -> BTreeSet<RuleName> {
        self.entries
            .iter()
            .filter(|e| e.verdict.is_ok())
            .flat_map(|e| e.rules.iter().copied())
            .collect()
    }
}

/// Checks one derivation against the budget.
pub fn check_entry(
    name: &str,
    d: &Derivation,
    budget: &SearchBudget,
) -> Result<EntryReport, SearchError> {
    let verdict = check_derivation(d);
    let refutation = refute_entailment(&d.conclusion.query(), budget)?;
    let node_counterexample = node_counterexample(d, budget)?;
    Ok(EntryReport {
        name: name.to_string(),
        conclusion: d.conclusion.clone(),
        rules: d.rules_used(),
        verdict,
        refutation,
        node_counterexample,
    })
}

/// First world, over the budget's structures, at which some node of `d`
/// fails world-wise. One scan covers all nodes.
pub fn node_counterexample(
    d: &Derivation,
    budget: &SearchBudget,
) -> Result<Option<NodeCounterexample>, SearchError> {
    let mut nodes: Vec<(Vec<usize>, &Sequent)> = Vec::new();
    collect(d, &mut Vec::new(), &mut nodes);
    let atoms: Vec<Atom> = nodes
        .iter()
        .flat_map(|(_, s)| s.atoms())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut program = Program::new();
    for a in &atoms {
        program.add(&Formula::Atom(a.clone()));
    }
    let ids: Vec<(Vec<usize>, Vec<usize>)> = nodes
        .iter()
        .map(|(_, s)| {
            (
                s.left.iter().map(|f| program.add(f)).collect(),
                s.right.iter().map(|f| program.add(f)).collect(),
            )
        })
        .collect();
    let hit = scan(budget, atoms.len(), program.contains_box(), |raw, out| {
        program.eval_masks(raw.rq_rows, raw.rm_rows, raw.atom_values, out);
        ids.iter().enumerate().find_map(|(k, (left, right))| {
            let mut bad = full_mask(raw.n);
            for &g in left {
                bad &= out[g];
            }
            for &a in right {
                bad &= !out[a];
            }
            (bad != 0).then(|| (k, raw.to_structure(&atoms), bad.trailing_zeros() as usize))
        })
    })?;
    Ok(hit.map(|(k, structure, world)| NodeCounterexample {
        path: nodes[k].0.clone(),
        sequent: nodes[k].1.clone(),
        countermodel: Countermodel { structure, world },
    }))
}

fn collect<'a>(d: &'a Derivation, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Sequent)>) {
    out.push((path.clone(), &d.conclusion));
    for (k, p) in d.premises.iter().enumerate() {
        path.push(k);
        collect(p, path, out);
        path.pop();
    }
}

/// Runs [`check_entry`] over the shipped corpus.
pub fn soundness_suite(budget: &SearchBudget) -> Result<SoundnessReport, SuiteError> {
    let mut entries = Vec::new();
    for entry in corpus()? {
        entries.push(check_entry(&entry.name, &entry.derivation, budget)?);
    }
    Ok(SoundnessReport { entries })
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("corpus: {0}")]
    Corpus(#[from] CalculusError),
    #[error(transparent)]
    Search(#[from] SearchError),
}
