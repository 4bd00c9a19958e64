//! Anytime inclusion-exclusion over unsupported constraints.
//!
//! `a_0` is the supported-model count under `L`. Level `i` subtracts (odd
//! `i`) or adds (even `i`) `val(τ(G)^{L ∪ B(Γ)})` for every set `Γ` of `i`
//! unsupported constraints. Even levels bound the answer set count from
//! above, odd ones from below; with all cycles the last level is exact.
//!
//! A term whose literal set is inconsistent is 0 and skipped. A term is
//! also skipped when some `Γ' ⊂ Γ` was already found to count 0, since
//! adding constraints only removes models.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{CompressedGraph, CountingError};
use crate::depgraph::CycleCatalog;
use crate::lp::{AssumptionSet, Lit};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Exact,
    Upper,
    Lower,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Exact => "exact",
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
        })
    }
}

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("evaluation budget of {cap} exhausted: level {level} needs {needed} more evaluations after {performed}")]
    Budget { cap: u64, level: usize, needed: u64, performed: u64 },
    #[error(transparent)]
    Counting(#[from] CountingError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefineOptions {
    /// Alternation depth; `None` means all levels.
    pub depth: Option<usize>,
    /// Round an odd depth up so the run ends on an addition.
    pub round_to_even: bool,
    /// Upper limit on graph evaluations actually performed.
    pub max_evaluations: Option<u64>,
}

impl RefineOptions {
    pub fn depth(depth: usize) -> Self {
        RefineOptions { depth: Some(depth), ..Default::default() }
    }

    pub fn full() -> Self {
        RefineOptions::default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub depth: usize,
    /// Evaluations performed at this level.
    pub terms: u64,
    /// Sets of this size that needed no evaluation.
    #[serde(with = "decimal_biguint")]
    pub skipped: BigUint,
    /// Running count `a_depth` after this level.
    #[serde(with = "decimal_bigint")]
    pub partial: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementTrace {
    /// One entry per computed level, starting with level 0.
    pub levels: Vec<LevelTrace>,
    #[serde(with = "decimal_bigint")]
    pub count: BigInt,
    pub bound: BoundKind,
    /// Depth requested after rounding, capped at the catalog size.
    pub target_depth: usize,
    /// Last level computed.
    pub effective_depth: usize,
    /// Set when the running count stopped changing: the count equals
    /// `a_k` for this `k` and every later level is 0.
    pub terminated_at: Option<usize>,
    /// Evaluations for levels `0..=effective_depth`; with the skipped
    /// count they sum to the binomial prefix up to `effective_depth`.
    pub evaluations_performed: u64,
    #[serde(with = "decimal_biguint")]
    pub evaluations_skipped: BigUint,
    pub catalog_size: usize,
    pub notes: Vec<String>,
}

impl RefinementTrace {
    /// `a_0`.
    pub fn supported(&self) -> &BigInt {
        &self.levels[0].partial
    }

    pub fn partials(&self) -> Vec<BigInt> {
        self.levels.iter().map(|l| l.partial.clone()).collect()
    }

    /// Line records `depth i: terms=<k> skipped=<s> partial=<a_i>` and a
    /// closing `count=<v> bound=<kind>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.levels {
            writeln!(out, "depth {}: terms={} skipped={} partial={}", l.depth, l.terms, l.skipped, l.partial).unwrap();
        }
        writeln!(out, "count={} bound={}", self.count, self.bound).unwrap();
        out
    }
}

/// Transport form of a refinement: counts as decimal strings, the trace
/// and an `inconsistent` warning when `L` contradicts itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub count: String,
    pub bound: BoundKind,
    /// Last level computed.
    pub depth: usize,
    pub target_depth: usize,
    pub terminated_at: Option<usize>,
    pub catalog_size: usize,
    pub evaluations_performed: u64,
    pub evaluations_skipped: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub notes: Vec<String>,
    pub trace: Vec<LevelTrace>,
}

impl From<&RefinementTrace> for CountReport {
    fn from(t: &RefinementTrace) -> Self {
        let inconsistent = t.notes.iter().any(|n| n == "inconsistent");
        CountReport {
            count: t.count.to_string(),
            bound: t.bound,
            depth: t.effective_depth,
            target_depth: t.target_depth,
            terminated_at: t.terminated_at,
            catalog_size: t.catalog_size,
            evaluations_performed: t.evaluations_performed,
            evaluations_skipped: t.evaluations_skipped.to_string(),
            warning: inconsistent.then(|| "inconsistent".to_owned()),
            notes: t.notes.iter().filter(|n| *n != "inconsistent").cloned().collect(),
            trace: t.levels.clone(),
        }
    }
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `Σ_{0≤i≤d} C(n, i)`.
pub fn binomial_prefix_sum(n: usize, d: usize) -> BigUint {
    (0..=d.min(n)).map(|i| binomial(n, i)).sum()
}

fn consistent_union(base: &[Lit], parts: &[&[Lit]]) -> Option<Vec<Lit>> {
    let mut all: Vec<Lit> = base.to_vec();
    for p in parts {
        all.extend_from_slice(p);
    }
    all.sort_unstable();
    all.dedup();
    if all.windows(2).any(|w| w[0].atom == w[1].atom) {
        return None;
    }
    Some(all)
}

/// Drops every unsupported constraint whose literals contradict `L`; such
/// constraints only contribute zero terms.
pub fn restrict_catalog(catalog: &CycleCatalog, assumptions: &AssumptionSet) -> CycleCatalog {
    let base: Vec<Lit> = assumptions.iter().collect();
    let mut out = catalog.clone();
    out.cycles.retain(|entry| consistent_union(&base, &[&entry.constraint()]).is_some());
    out
}

/// Runs the refinement up to the requested depth.
///
/// The loop mirrors the anytime scheme: before level `i` the running count
/// is compared with its value before level `i - 1`; equality stops the run.
pub fn refine(
    graph: &CompressedGraph,
    catalog: &CycleCatalog,
    assumptions: &AssumptionSet,
    opts: &RefineOptions,
) -> Result<RefinementTrace, RefineError> {
    let n = catalog.cycles.len();
    let base: Vec<Lit> = assumptions.iter().collect();
    for lit in &base {
        if !graph.knows(lit.atom) {
            return Err(CountingError::UnknownAtom(lit.atom.0).into());
        }
    }
    let mut depth = opts.depth.unwrap_or(n);
    if opts.round_to_even && depth % 2 == 1 {
        depth += 1;
    }
    let target = depth.min(n);
    let mut notes = Vec::new();

    let (a0, inconsistent) = match graph.evaluate_lits(&base)? {
        Some((v, _)) => (BigInt::from(v), false),
        None => {
            notes.push("inconsistent".to_owned());
            (BigInt::zero(), true)
        }
    };
    let (terms0, skipped0) = if inconsistent { (0, BigUint::one()) } else { (1, BigUint::zero()) };
    let mut levels = vec![LevelTrace { depth: 0, terms: terms0, skipped: skipped0.clone(), partial: a0.clone() }];
    let constraints: Vec<Vec<Lit>> = catalog.cycles.iter().map(|e| e.constraint()).collect();

    let mut count = a0;
    let mut previous = BigInt::zero();
    let mut terminated_at = None;
    let mut performed = terms0;
    let mut skipped_total = skipped0;
    // Sets of the previous level with a non-zero term.
    let mut live: Vec<Vec<u32>> = vec![Vec::new()];
    let mut effective = 0;

    for i in 1..=target {
        if previous == count {
            terminated_at = Some(i - 1);
            break;
        }
        previous = count.clone();

        let live_set: HashSet<&[u32]> = live.iter().map(Vec::as_slice).collect();
        let mut candidates: Vec<(Vec<u32>, Vec<Lit>)> = Vec::new();
        for parent in &live {
            let start = parent.last().map_or(0, |&l| l + 1);
            for j in start..n as u32 {
                let mut gamma = parent.clone();
                gamma.push(j);
                // Every subset of size i - 1 must have had a non-zero term.
                let all_live = i == 1
                    || (0..gamma.len() - 1).all(|drop| {
                        let sub: Vec<u32> =
                            gamma.iter().enumerate().filter(|&(k, _)| k != drop).map(|(_, &g)| g).collect();
                        live_set.contains(sub.as_slice())
                    });
                if !all_live {
                    continue;
                }
                let parts: Vec<&[Lit]> = gamma.iter().map(|&g| constraints[g as usize].as_slice()).collect();
                if let Some(lits) = consistent_union(&base, &parts) {
                    candidates.push((gamma, lits));
                }
            }
        }
        drop(live_set);

        let needed = candidates.len() as u64;
        if let Some(cap) = opts.max_evaluations {
            if performed + needed > cap {
                return Err(RefineError::Budget { cap, level: i, needed, performed });
            }
        }
        let values: Vec<BigUint> = candidates
            .par_iter()
            .map(|(_, lits)| graph.evaluate_lits(lits).map(|r| r.map_or_else(BigUint::zero, |(v, _)| v)))
            .collect::<Result<_, _>>()?;

        let mut level_sum = BigUint::zero();
        let mut next_live = Vec::new();
        for ((gamma, _), v) in candidates.into_iter().zip(values) {
            if !v.is_zero() {
                level_sum += &v;
                next_live.push(gamma);
            }
        }
        if i % 2 == 1 {
            count -= BigInt::from(level_sum);
        } else {
            count += BigInt::from(level_sum);
        }
        let skipped = binomial(n, i) - BigUint::from(needed);
        performed += needed;
        skipped_total += &skipped;
        levels.push(LevelTrace { depth: i, terms: needed, skipped, partial: count.clone() });
        live = next_live;
        effective = i;
    }
    let full = terminated_at.is_some() || effective >= n;
    let bound = if inconsistent {
        BoundKind::Exact
    } else if full {
        if catalog.complete {
            BoundKind::Exact
        } else {
            if n == 0 && !catalog.tight {
                notes.push("non-tight program with an empty cycle catalog; count is the supported-model count".into());
            } else {
                notes.push("simple-cycle catalog may miss cycles; count is an upper bound".into());
            }
            BoundKind::Upper
        }
    } else if effective % 2 == 0 {
        BoundKind::Upper
    } else {
        if !catalog.complete {
            notes.push("simple-cycle catalog: odd-depth value is not a guaranteed lower bound".into());
        }
        BoundKind::Lower
    };

    // An upper bound of zero leaves nothing to refine.
    let bound = if bound == BoundKind::Upper && count.is_zero() { BoundKind::Exact } else { bound };

    Ok(RefinementTrace {
        levels,
        count,
        bound,
        target_depth: target,
        effective_depth: effective,
        terminated_at,
        evaluations_performed: performed,
        evaluations_skipped: skipped_total,
        catalog_size: n,
        notes,
    })
}

/// All levels over the catalog restricted to `L`.
pub fn exact_count(
    graph: &CompressedGraph,
    catalog: &CycleCatalog,
    assumptions: &AssumptionSet,
) -> Result<RefinementTrace, RefineError> {
    refine(graph, &restrict_catalog(catalog, assumptions), assumptions, &RefineOptions::full())
}

mod decimal_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod decimal_biguint {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
