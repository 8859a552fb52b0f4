//! JSON model files.
//!
//! ```json
//! {"worlds": ["w0", "w1"], "rq": [[0, 1], [1, 0]], "rm": [[0, 1]],
//!  "valuation": {"p": [0]}}
//! ```
//!
//! Reflexive pairs may be left out of `rq`; they are added on load. Symmetry
//! is never completed automatically, so a one-directional `rq` pair shows up
//! as a symmetry violation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Atom;
use crate::frame::{FrameError, Relation, Structure, WorldSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub rq: Vec<[usize; 2]>,
    #[serde(default)]
    pub rm: Vec<[usize; 2]>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid atom name in valuation: '{0}'")]
    AtomName(String),
    #[error("{context}: {source}")]
    Frame {
        context: &'static str,
        source: FrameError,
    },
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the structure. Out-of-range indices and bad atom names are
    /// errors; semantic problems are left to `Structure::validate`.
    pub fn to_structure(&self) -> Result<Structure, ModelError> {
        let n = self.worlds.len();
        let frame = |context| move |source| ModelError::Frame { context, source };
        let rq = Relation::from_pairs(n, self.rq.iter().map(|&[i, j]| (i, j)))
            .map_err(frame("rq"))?
            .with_reflexive_closure();
        let rm =
            Relation::from_pairs(n, self.rm.iter().map(|&[i, j]| (i, j))).map_err(frame("rm"))?;
        let mut valuation = BTreeMap::new();
        for (name, worlds) in &self.valuation {
            let atom = Atom::new(name).map_err(|_| ModelError::AtomName(name.clone()))?;
            let set =
                WorldSet::from_worlds(n, worlds.iter().copied()).map_err(frame("valuation"))?;
            valuation.insert(atom, set);
        }
        Structure::new(n, rq, rm, valuation)
            .and_then(|s| s.with_names(self.worlds.clone()))
            .map_err(frame("structure"))
    }

    /// Serialises every pair explicitly, reflexive `rq` pairs included.
    pub fn from_structure(s: &Structure) -> Self {
        ModelFile {
            worlds: s.world_names(),
            rq: s.rq().pairs().into_iter().map(|(i, j)| [i, j]).collect(),
            rm: s.rm().pairs().into_iter().map(|(i, j)| [i, j]).collect(),
            valuation: s
                .valuation()
                .iter()
                .map(|(a, set)| (a.to_string(), set.iter().collect()))
                .collect(),
        }
    }
}

pub fn structure_from_json(text: &str) -> Result<Structure, ModelError> {
    ModelFile::from_json(text)?.to_structure()
}
