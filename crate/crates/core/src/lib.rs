//! Answer set counting under assumptions.
//!
//! The offline phase turns a ground normal program into Clark's completion,
//! compiles it into a smooth deterministic decomposable NNF and compresses
//! the resulting counting graph. The online phase counts supported models
//! under assumptions by conditioning and refines the count towards the
//! number of answer sets by inclusion-exclusion over unsupported
//! constraints of positive cycles.

pub mod artifact;
pub mod completion;
pub mod counting;
pub mod depgraph;
pub mod error;
pub mod inclexcl;
pub mod instances;
pub mod lp;
pub mod nnf;
pub mod oracle;
pub mod samples;

pub use error::Error;
pub use lp::{AssumptionSet, Atom, Lit, Program, Rule};
