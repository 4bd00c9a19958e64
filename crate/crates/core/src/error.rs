use thiserror::Error;

use crate::completion::CnfError;
use crate::counting::CountingError;
use crate::depgraph::DepgraphError;
use crate::inclexcl::RefineError;
use crate::lp::{AssumptionError, ParseError};
use crate::nnf::{CompileError, NnfError};
use crate::oracle::OracleError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Assumption(#[from] AssumptionError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Nnf(#[from] NnfError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    Depgraph(#[from] DepgraphError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("artifact: {0}")]
    Artifact(String),
    #[error("artifact was compiled from a different program (digest {artifact}, given {given})")]
    DigestMismatch { artifact: String, given: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error reports an exhausted resource budget rather than
    /// bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::Compile(CompileError::NodeBudget { .. })
                | Error::Depgraph(DepgraphError::CycleBudget { .. })
                | Error::Refine(RefineError::Budget { .. })
        )
    }
}
