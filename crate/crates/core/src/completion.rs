//! Clark's completion as CNF.
//!
//! Program atoms occupy variables `1..=n` in atom order; body auxiliaries
//! follow. Every auxiliary is defined by an equivalence with its body, so
//! each model of the completion over program atoms extends to exactly one
//! model of the CNF.

use std::fmt::Write as _;

use thiserror::Error;

use crate::lp::{AssumptionSet, Atom, Lit, Program};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Atom(Atom),
    Aux,
}

/// Clause set in DIMACS convention plus the variable table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfDoc {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
    /// `var_kind[v - 1]` describes variable `v`.
    pub var_kind: Vec<VarKind>,
}

impl CnfDoc {
    /// A CNF whose variables all stand for program atoms.
    pub fn from_clauses(num_vars: u32, clauses: Vec<Vec<i32>>) -> Self {
        CnfDoc { num_vars, clauses, var_kind: (0..num_vars).map(|v| VarKind::Atom(Atom(v))).collect() }
    }

    pub fn kind(&self, var: u32) -> VarKind {
        self.var_kind[var as usize - 1]
    }

    pub fn program_atoms(&self) -> usize {
        self.var_kind.iter().filter(|k| matches!(k, VarKind::Atom(_))).count()
    }

    /// `p cnf` header followed by zero-terminated clauses.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                write!(out, "{lit} ").unwrap();
            }
            out.push_str("0\n");
        }
        out
    }

    /// Sidecar map: `v <var> <atom>` for program atoms, `x <var>` for
    /// auxiliaries.
    pub fn variable_map(&self, program: &Program) -> String {
        let mut out = String::new();
        for (i, kind) in self.var_kind.iter().enumerate() {
            match kind {
                VarKind::Atom(a) => writeln!(out, "v {} {}", i + 1, program.name(*a)).unwrap(),
                VarKind::Aux => writeln!(out, "x {}", i + 1).unwrap(),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error("assumptions are inconsistent")]
    InconsistentAssumptions,
}

/// Parses DIMACS CNF. All variables are tagged as program atoms `v - 1`
/// unless a variable map is applied afterwards.
pub fn parse_dimacs(text: &str) -> Result<CnfDoc, CnfError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| CnfError::Dimacs { line: i + 1, message };
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            match parts.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| err(format!("bad variable count `{v}`")))?;
                    let c = c.parse().map_err(|_| err(format!("bad clause count `{c}`")))?;
                    header = Some((v, c));
                }
                _ => return Err(err("malformed header".into())),
            }
            continue;
        }
        let (num_vars, _) = header.ok_or_else(|| err("clause before `p cnf` header".into()))?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| err(format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() > num_vars {
                    return Err(err(format!("literal {lit} exceeds declared {num_vars} variables")));
                }
                current.push(lit);
            }
        }
    }
    let (num_vars, declared) = header.ok_or(CnfError::Dimacs { line: 0, message: "missing header".into() })?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(CnfError::Dimacs {
            line: 0,
            message: format!("header declares {declared} clauses, found {}", clauses.len()),
        });
    }
    Ok(CnfDoc { num_vars, clauses, var_kind: (0..num_vars).map(|v| VarKind::Atom(Atom(v))).collect() })
}

struct Encoder {
    clauses: Vec<Vec<i32>>,
    var_kind: Vec<VarKind>,
}

impl Encoder {
    fn fresh_aux(&mut self) -> i32 {
        self.var_kind.push(VarKind::Aux);
        self.var_kind.len() as i32
    }

    /// The literal standing for a rule body: the single literal itself, or
    /// an auxiliary equivalent to the conjunction.
    fn body_term(&mut self, body: &[Lit]) -> i32 {
        if let [single] = body {
            return single.to_dimacs();
        }
        let x = self.fresh_aux();
        let lits: Vec<i32> = body.iter().map(|l| l.to_dimacs()).collect();
        for &l in &lits {
            self.clauses.push(vec![-x, l]);
        }
        let mut back = vec![x];
        back.extend(lits.iter().map(|l| -l));
        self.clauses.push(back);
        x
    }
}

/// Builds `compl(Π)` in CNF.
///
/// Per atom `a` with defining rules `r_1..r_k`: no rules gives `¬a`; a fact
/// gives `a`; otherwise `¬a ∨ t_1 ∨ … ∨ t_k` and `a ∨ ¬t_i` where `t_i`
/// is the body term. A constraint contributes `¬BF(r)`.
pub fn build_completion(program: &Program) -> CnfDoc {
    let n = program.atom_count();
    let mut enc = Encoder { clauses: Vec::new(), var_kind: (0..n as u32).map(|i| VarKind::Atom(Atom(i))).collect() };

    let mut bodies: Vec<Vec<Vec<Lit>>> = vec![Vec::new(); n];
    let mut constraints = Vec::new();
    for rule in program.rules() {
        let body: Vec<Lit> = rule.body_lits().collect();
        match rule.head {
            Some(h) => bodies[h.index()].push(body),
            None => constraints.push(body),
        }
    }

    for (i, defs) in bodies.iter().enumerate() {
        let a = Lit::pos(Atom(i as u32)).to_dimacs();
        if defs.is_empty() {
            enc.clauses.push(vec![-a]);
            continue;
        }
        if defs.iter().any(|b| b.is_empty()) {
            enc.clauses.push(vec![a]);
            continue;
        }
        let terms: Vec<i32> = defs.iter().map(|b| enc.body_term(b)).collect();
        let mut forward = vec![-a];
        forward.extend(&terms);
        enc.clauses.push(forward);
        for t in terms {
            enc.clauses.push(vec![a, -t]);
        }
    }

    for body in constraints {
        enc.clauses.push(body.iter().map(|l| -l.to_dimacs()).collect());
    }

    CnfDoc { num_vars: enc.var_kind.len() as u32, clauses: enc.clauses, var_kind: enc.var_kind }
}

/// Conjoins one unit clause per assumption.
pub fn apply_assumptions(cnf: &CnfDoc, assumptions: &AssumptionSet) -> Result<CnfDoc, CnfError> {
    if !assumptions.is_consistent() {
        return Err(CnfError::InconsistentAssumptions);
    }
    let mut out = cnf.clone();
    out.clauses.extend(assumptions.iter().map(|l| vec![l.to_dimacs()]));
    Ok(out)
}

/// Brute-force model count over all variables. Test helper; `num_vars`
/// must be small.
pub fn brute_force_count(cnf: &CnfDoc) -> u64 {
    assert!(cnf.num_vars <= 26, "brute force over {} variables", cnf.num_vars);
    (0..1u64 << cnf.num_vars)
        .filter(|m| {
            cnf.clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let bit = m >> (l.unsigned_abs() - 1) & 1 == 1;
                    bit == (l > 0)
                })
            })
        })
        .count() as u64
}

/// Brute-force models projected onto program atoms (as bitmasks over atom
/// indices), with multiplicity.
pub fn brute_force_projected(cnf: &CnfDoc) -> Vec<u64> {
    assert!(cnf.num_vars <= 26);
    let mut out = Vec::new();
    for m in 0..1u64 << cnf.num_vars {
        let sat = cnf.clauses.iter().all(|c| c.iter().any(|&l| (m >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0)));
        if sat {
            let mut proj = 0u64;
            for (v, kind) in cnf.var_kind.iter().enumerate() {
                if let VarKind::Atom(a) = kind {
                    if m >> v & 1 == 1 {
                        proj |= 1 << a.0;
                    }
                }
            }
            out.push(proj);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{parse_assumptions, parse_program};
    use crate::oracle::{enumerate_supported_models, Interpretation};
    use crate::samples::*;

    fn projected_models(cnf: &CnfDoc) -> Vec<Interpretation> {
        let mut v: Vec<_> =
            brute_force_projected(cnf).into_iter().map(|m| Interpretation::from_mask(m as u32)).collect();
        v.sort();
        v
    }

    #[test]
    fn pi1_clauses_and_models() {
        let p = parse_program(PI1).unwrap();
        let cnf = build_completion(&p);
        assert_eq!(cnf.num_vars, 3);
        assert_eq!(cnf.clauses, vec![vec![-1, 2], vec![1, -2], vec![2], vec![-3, 3], vec![3, -3]]);
        let mut sp = enumerate_supported_models(&p).unwrap();
        sp.sort();
        assert_eq!(projected_models(&cnf), sp);
    }

    #[test]
    fn single_fact() {
        let p = parse_program("a.").unwrap();
        let cnf = build_completion(&p);
        assert_eq!(cnf.clauses, vec![vec![1]]);
        assert_eq!(brute_force_count(&cnf), 1);
    }

    #[test]
    fn pi2_counts() {
        let p = parse_program(PI2).unwrap();
        let cnf = build_completion(&p);
        assert_eq!(brute_force_count(&cnf), 3);
        let d = parse_assumptions(&p, "d").unwrap();
        assert_eq!(brute_force_count(&apply_assumptions(&cnf, &d).unwrap()), 2);
    }

    #[test]
    fn assumptions_on_pi1() {
        let p = parse_program(PI1).unwrap();
        let cnf = build_completion(&p);
        let not_c = parse_assumptions(&p, "-c").unwrap();
        assert_eq!(brute_force_count(&apply_assumptions(&cnf, &not_c).unwrap()), 1);
        assert_eq!(apply_assumptions(&cnf, &AssumptionSet::new()).unwrap(), cnf);
        let bad = parse_assumptions(&p, "c,-c").unwrap();
        assert_eq!(apply_assumptions(&cnf, &bad), Err(CnfError::InconsistentAssumptions));
    }

    #[test]
    fn auxiliaries_are_functional() {
        // Each projected model appears exactly once.
        let p = parse_program("a :- b, not c. a :- c, d. b :- not c. c :- not b. d :- a, b. :- d, c.").unwrap();
        let cnf = build_completion(&p);
        assert!(cnf.num_vars > p.atom_count() as u32);
        let mut proj = brute_force_projected(&cnf);
        let before = proj.len();
        proj.sort();
        proj.dedup();
        assert_eq!(proj.len(), before);
        assert_eq!(proj.len(), enumerate_supported_models(&p).unwrap().len());
    }

    #[test]
    fn contradictory_body_forces_aux_false() {
        let p = parse_program("a :- b, not b. b :- not c. c :- not b.").unwrap();
        let cnf = build_completion(&p);
        assert_eq!(brute_force_count(&cnf), enumerate_supported_models(&p).unwrap().len() as u64);
    }

    #[test]
    fn dimacs_and_map_output() {
        let p = parse_program("a :- b, c. b. c.").unwrap();
        let cnf = build_completion(&p);
        let text = cnf.to_dimacs();
        assert!(text.starts_with("p cnf 4 "));
        assert_eq!(parse_dimacs(&text).unwrap().clauses, cnf.clauses);
        assert_eq!(cnf.variable_map(&p), "v 1 a\nv 2 b\nv 3 c\nx 4\n");
        assert_eq!(build_completion(&p).to_dimacs(), text);
    }

    #[test]
    fn dimacs_errors() {
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 2 0\n").is_err());
        assert_eq!(parse_dimacs("p cnf 2 0\n").unwrap().num_vars, 2);
    }
}
