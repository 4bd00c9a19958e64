//! Brute-force reference semantics. Every function here enumerates all
//! `2^n` interpretations and is meant for small programs only.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lp::{AssumptionSet, Atom, Program, Rule};

/// Largest program the oracle will enumerate.
pub const MAX_ORACLE_ATOMS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("program has {atoms} atoms; the brute-force oracle accepts at most {MAX_ORACLE_ATOMS}")]
    TooManyAtoms { atoms: usize },
}

/// A set of true atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation(pub BTreeSet<Atom>);

impl Interpretation {
    pub fn from_mask(mask: u32) -> Self {
        Interpretation((0..32).filter(|i| mask >> i & 1 == 1).map(Atom).collect())
    }

    pub fn mask(&self) -> u32 {
        self.0.iter().fold(0, |m, a| m | 1 << a.0)
    }

    pub fn contains(&self, atom: Atom) -> bool {
        self.0.contains(&atom)
    }

    pub fn names(&self, program: &Program) -> Vec<String> {
        self.0.iter().map(|&a| program.name(a).to_owned()).collect()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Semantics {
    Answer,
    Supported,
}

fn guard(program: &Program) -> Result<(), OracleError> {
    if program.atom_count() > MAX_ORACLE_ATOMS {
        return Err(OracleError::TooManyAtoms { atoms: program.atom_count() });
    }
    Ok(())
}

struct MaskRule {
    head: Option<u32>,
    pos: u32,
    neg: u32,
}

fn mask_rules(program: &Program) -> Vec<MaskRule> {
    let bits = |atoms: &[Atom]| atoms.iter().fold(0u32, |m, a| m | 1 << a.0);
    program
        .rules()
        .iter()
        .map(|r| MaskRule { head: r.head.map(|h| h.0), pos: bits(&r.pos_body), neg: bits(&r.neg_body) })
        .collect()
}

#[inline]
fn body_holds(r: &MaskRule, i: u32) -> bool {
    r.pos & i == r.pos && r.neg & i == 0
}

/// The GL reduct: rules blocked by `interp` are dropped, the rest lose
/// their negative body.
pub fn gl_reduct(program: &Program, interp: &Interpretation) -> Program {
    let mut out = program.clone_atoms();
    for r in program.rules() {
        if r.neg_body.iter().all(|a| !interp.contains(*a)) {
            out.add_rule(Rule::new(r.head, r.pos_body.clone(), Vec::new()));
        }
    }
    out
}

/// Least model of the definite rules in `rules` (constraints ignored), by
/// naive fixpoint iteration.
fn least_model(rules: &[MaskRule], interp: u32) -> u32 {
    let mut model = 0u32;
    loop {
        let mut next = model;
        for r in rules {
            if let Some(h) = r.head {
                if r.neg & interp == 0 && r.pos & model == r.pos {
                    next |= 1 << h;
                }
            }
        }
        if next == model {
            return model;
        }
        model = next;
    }
}

fn is_stable(rules: &[MaskRule], i: u32) -> bool {
    // Constraints of the reduct must hold as well.
    let constraints_ok = rules.iter().filter(|r| r.head.is_none()).all(|r| !body_holds(r, i));
    constraints_ok && least_model(rules, i) == i
}

fn is_supported(rules: &[MaskRule], n: usize, i: u32) -> bool {
    let mut derivable = 0u32;
    for r in rules {
        if body_holds(r, i) {
            match r.head {
                Some(h) => derivable |= 1 << h,
                None => return false,
            }
        }
    }
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    derivable & all == i
}

fn enumerate(program: &Program, keep: impl Fn(&[MaskRule], u32) -> bool) -> Result<Vec<Interpretation>, OracleError> {
    guard(program)?;
    let rules = mask_rules(program);
    let n = program.atom_count();
    Ok((0..1u32 << n).filter(|&i| keep(&rules, i)).map(Interpretation::from_mask).collect())
}

/// All answer sets: `I` is stable iff it equals the least model of its
/// reduct and satisfies the reduct's constraints.
pub fn enumerate_answer_sets(program: &Program) -> Result<Vec<Interpretation>, OracleError> {
    enumerate(program, is_stable)
}

/// All supported models (models of the completion).
pub fn enumerate_supported_models(program: &Program) -> Result<Vec<Interpretation>, OracleError> {
    let n = program.atom_count();
    enumerate(program, |rules, i| is_supported(rules, n, i))
}

/// Stability by the subset-minimality definition: `I` satisfies the
/// reduct and no proper subset does. Exponential in `|I|`; used to cross
/// check the least-model route.
pub fn is_answer_set_by_minimality(program: &Program, interp: &Interpretation) -> bool {
    let reduct = mask_rules(&gl_reduct(program, interp));
    let satisfies = |j: u32| {
        reduct.iter().all(|r| {
            if r.pos & j != r.pos {
                return true;
            }
            matches!(r.head, Some(h) if j >> h & 1 == 1)
        })
    };
    let i = interp.mask();
    if !satisfies(i) {
        return false;
    }
    // Enumerate proper subsets of i.
    let mut sub = i;
    while sub != 0 {
        sub = (sub - 1) & i;
        if satisfies(sub) {
            return false;
        }
    }
    true
}

/// Number of models of the chosen semantics that agree with `assumptions`.
/// An inconsistent assumption set yields 0.
pub fn count_under(program: &Program, assumptions: &AssumptionSet, semantics: Semantics) -> Result<u64, OracleError> {
    guard(program)?;
    if !assumptions.is_consistent() {
        return Ok(0);
    }
    let (mut must, mut must_not) = (0u32, 0u32);
    for lit in assumptions.iter() {
        if lit.positive {
            must |= 1 << lit.atom.0;
        } else {
            must_not |= 1 << lit.atom.0;
        }
    }
    let rules = mask_rules(program);
    let n = program.atom_count();
    let count = (0..1u32 << n)
        .filter(|&i| i & must == must && i & must_not == 0)
        .filter(|&i| match semantics {
            Semantics::Answer => is_stable(&rules, i),
            Semantics::Supported => is_supported(&rules, n, i),
        })
        .count();
    Ok(count as u64)
}
