//! Team semantics for bilateral state-based modal logic and its extensions
//! with the emptiness operator (`@`) and inquisitive disjunction (`\/`).
//!
//! - [`formula`]: syntax, parsing, printing and transforms
//! - [`kripke`]: finite models and teams
//! - [`teameval`]: support and anti-support
//! - [`bisim`]: bounded bisimulation by partition refinement
//! - [`hintikka`]: characteristic formulas, canonical models, normal forms
//! - [`decide`]: entailment and equivalence engines
//! - [`proofcheck`]: natural deduction proof checking

pub mod bisim;
pub mod decide;
pub mod formula;
pub mod hintikka;
pub mod kripke;
pub mod proofcheck;
pub mod teameval;

pub use formula::{parse, Formula, Tier};
pub use kripke::{Model, State};
