//! Quantum modal logic over finite structures.
//!
//! * [`formula`]: formula syntax, parser and printer.
//! * [`frame`]: structures, relation checks and the closure operator.
//! * [`eval`]: truth at a world, truth sets, entailment in a structure.
//! * [`search`]: structure enumeration and countermodel search.
//! * [`calculus`]: sequents, derivation checking and proof search.
//! * [`harness`]: the shipped derivation corpus and the soundness check.

pub mod calculus;
pub mod eval;
pub mod formula;
pub mod frame;
pub mod harness;
pub mod model;
pub mod search;

pub use calculus::{Derivation, Rule, Sequent};
pub use eval::{entails_in, holds, truth_set, EntailmentQuery};
pub use formula::{parse, Atom, Formula};
pub use frame::{Relation, Structure, Violation, WorldSet};
pub use search::{SearchBudget, SearchMode};
