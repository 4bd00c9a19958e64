use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use asnav_core::artifact::{digest_of, CompiledArtifact};
use asnav_core::lp::{AssumptionSet, Lit};
use axum::http::StatusCode;

use crate::error::ApiError;

/// Assumptions and the literals pushed to reach them, newest last.
#[derive(Clone, Debug, Default)]
pub struct Navigation {
    pub assumptions: AssumptionSet,
    pub history: Vec<Lit>,
}

pub struct Session {
    pub id: String,
    pub artifact: Arc<CompiledArtifact>,
    /// Default refinement depth; `None` means full.
    pub depth: Option<usize>,
    nav: RwLock<Navigation>,
}

impl Session {
    pub fn new(id: String, artifact: Arc<CompiledArtifact>, depth: Option<usize>) -> Self {
        Session { id, artifact, depth, nav: RwLock::new(Navigation::default()) }
    }

    pub fn navigation(&self) -> Navigation {
        self.nav.read().unwrap().clone()
    }

    /// Adds `lit`; fails when its complement is already assumed. Assuming a
    /// literal twice leaves the state and history unchanged.
    pub fn assume(&self, lit: Lit) -> Result<Navigation, ApiError> {
        let mut nav = self.nav.write().unwrap();
        if nav.assumptions.contains(&lit.negate()) {
            let name = self.artifact.program.format_lit(lit);
            return Err(ApiError::conflict(format!("`{name}` contradicts the current assumptions")));
        }
        if nav.assumptions.insert(lit) {
            nav.history.push(lit);
        }
        Ok(nav.clone())
    }

    pub fn undo(&self) -> Result<Navigation, ApiError> {
        let mut nav = self.nav.write().unwrap();
        let lit = nav.history.pop().ok_or_else(|| ApiError::conflict("nothing to undo"))?;
        nav.assumptions.remove(&lit);
        Ok(nav.clone())
    }

    /// Digest of program, assumptions and depth; undo restores it exactly.
    pub fn state_digest(&self, nav: &Navigation) -> String {
        let depth = self.depth.map_or_else(|| "full".to_owned(), |d| d.to_string());
        digest_of(&format!("{}\n{}\n{}", self.artifact.digest, nav.assumptions.format(&self.artifact.program), depth))
    }
}

pub enum Entry {
    Compiling,
    Ready(Arc<Session>),
    Failed(ApiError),
}

#[derive(Default)]
pub struct Store {
    entries: RwLock<HashMap<String, Entry>>,
}

pub enum Lookup {
    Compiling,
    Ready(Arc<Session>),
}

impl Store {
    pub fn insert(&self, id: &str, entry: Entry) {
        self.entries.write().unwrap().insert(id.to_owned(), entry);
    }

    pub fn lookup(&self, id: &str) -> Result<Lookup, ApiError> {
        match self.entries.read().unwrap().get(id) {
            None => Err(ApiError::not_found(id)),
            Some(Entry::Compiling) => Ok(Lookup::Compiling),
            Some(Entry::Ready(s)) => Ok(Lookup::Ready(s.clone())),
            Some(Entry::Failed(e)) => Err(ApiError::new(e.status, e.message.clone())),
        }
    }

    /// The session when compilation has finished.
    pub fn ready(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        match self.lookup(id)? {
            Lookup::Ready(s) => Ok(s),
            Lookup::Compiling => Err(ApiError::new(StatusCode::ACCEPTED, "still compiling")),
        }
    }
}
