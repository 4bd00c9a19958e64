//! Positive dependency graph, cycle catalogs, external supports and
//! unsupported constraints.
//!
//! A cycle is identified with its vertex set. Two enumeration modes exist:
//! `Simple` collects the vertex sets of simple directed cycles (Johnson's
//! algorithm); `Exhaustive` collects every vertex set of a closed walk, i.e.
//! every set whose induced subgraph is strongly connected and has an edge.
//! Exact answer set counting needs the latter.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{Atom, Lit, Program, Rule};

pub const DEFAULT_CYCLE_CAP: usize = 10_000;

/// Raw circuits Johnson's algorithm may visit per allowed distinct set.
const CIRCUITS_PER_SET: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepgraphError {
    #[error("cycle budget exhausted: more than {cap} cycles ({found} found before aborting)")]
    CycleBudget { found: usize, cap: usize },
    #[error("rule {rule} supports a cycle through a body with {literals} literals; run support normalization first")]
    UnnormalizedSupport { rule: usize, literals: usize },
    #[error("catalog line {line}: {message}")]
    CatalogSyntax { line: usize, message: String },
}

/// `DP(Π)`: an edge `b -> h` for every rule with head `h` and `b` in its
/// positive body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepGraph {
    succ: Vec<Vec<u32>>,
}

impl DepGraph {
    pub fn vertex_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, v: Atom) -> &[u32] {
        &self.succ[v.index()]
    }

    pub fn has_edge(&self, from: Atom, to: Atom) -> bool {
        self.succ[from.index()].binary_search(&to.0).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Atom, Atom)> + '_ {
        self.succ.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (Atom(u as u32), Atom(v))))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// Strongly connected components restricted to vertices in `allowed`,
    /// in reverse topological order (iterative Tarjan).
    fn sccs(&self, allowed: &FixedBitSet) -> Vec<Vec<u32>> {
        let n = self.succ.len();
        const UNSEEN: u32 = u32::MAX;
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0u32; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut out = Vec::new();
        let mut counter = 0u32;
        let mut frames: Vec<(u32, usize)> = Vec::new();

        for root in allowed.ones() {
            if index[root] != UNSEEN {
                continue;
            }
            frames.push((root as u32, 0));
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root as u32);
            on_stack[root] = true;

            while let Some(&mut (v, ref mut next)) = frames.last_mut() {
                let vi = v as usize;
                if let Some(&w) = self.succ[vi].get(*next) {
                    *next += 1;
                    let wi = w as usize;
                    if !allowed.contains(wi) {
                        continue;
                    }
                    if index[wi] == UNSEEN {
                        index[wi] = counter;
                        low[wi] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[wi] = true;
                        frames.push((w, 0));
                    } else if on_stack[wi] {
                        low[vi] = low[vi].min(index[wi]);
                    }
                } else {
                    frames.pop();
                    if let Some(&(parent, _)) = frames.last() {
                        let p = parent as usize;
                        low[p] = low[p].min(low[vi]);
                    }
                    if low[vi] == index[vi] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w as usize] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        out.push(comp);
                    }
                }
            }
        }
        out
    }

    fn all_vertices(&self) -> FixedBitSet {
        let mut all = FixedBitSet::with_capacity(self.succ.len());
        all.insert_range(..);
        all
    }

    /// True iff the component contains a cycle: more than one vertex, or a
    /// self-loop.
    fn is_cyclic_component(&self, comp: &[u32]) -> bool {
        comp.len() > 1 || self.has_edge(Atom(comp[0]), Atom(comp[0]))
    }

    /// Whether `v` lies on a cycle that avoids every vertex in `avoid`.
    fn on_cycle_avoiding(&self, v: Atom, avoid: &[Atom]) -> bool {
        if avoid.contains(&v) {
            return false;
        }
        let mut seen = FixedBitSet::with_capacity(self.succ.len());
        for a in avoid {
            seen.insert(a.index());
        }
        let mut work: Vec<u32> = self.succ[v.index()].clone();
        while let Some(w) = work.pop() {
            if w == v.0 {
                return true;
            }
            if seen.put(w as usize) {
                continue;
            }
            work.extend_from_slice(&self.succ[w as usize]);
        }
        false
    }
}

pub fn build_depgraph(program: &Program) -> DepGraph {
    let mut succ = vec![Vec::new(); program.atom_count()];
    for rule in program.rules() {
        if let Some(h) = rule.head {
            for b in &rule.pos_body {
                succ[b.index()].push(h.0);
            }
        }
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    DepGraph { succ }
}

/// A program is tight iff its positive dependency graph is acyclic; a
/// self-loop counts as a cycle.
pub fn is_tight(graph: &DepGraph) -> bool {
    graph.sccs(&graph.all_vertices()).iter().all(|c| !graph.is_cyclic_component(c))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleMode {
    Simple,
    Exhaustive,
}

impl std::str::FromStr for CycleMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(CycleMode::Simple),
            "exhaustive" => Ok(CycleMode::Exhaustive),
            other => Err(format!("unknown cycle mode `{other}` (expected simple|exhaustive)")),
        }
    }
}

impl std::fmt::Display for CycleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CycleMode::Simple => "simple",
            CycleMode::Exhaustive => "exhaustive",
        })
    }
}

struct Johnson<'g> {
    graph: &'g DepGraph,
    in_scope: FixedBitSet,
    blocked: FixedBitSet,
    block_map: Vec<Vec<u32>>,
    found: BTreeSet<Vec<Atom>>,
    circuits: usize,
    cap: usize,
}

impl Johnson<'_> {
    fn unblock(&mut self, u: u32) {
        let mut work = vec![u];
        while let Some(x) = work.pop() {
            if !self.blocked.contains(x as usize) {
                continue;
            }
            self.blocked.set(x as usize, false);
            work.append(&mut self.block_map[x as usize]);
        }
    }

    fn record(&mut self, path: &[u32]) -> Result<(), DepgraphError> {
        self.circuits += 1;
        let mut set: Vec<Atom> = path.iter().map(|&v| Atom(v)).collect();
        set.sort_unstable();
        self.found.insert(set);
        if self.found.len() > self.cap || self.circuits > self.cap.saturating_mul(CIRCUITS_PER_SET) {
            return Err(DepgraphError::CycleBudget { found: self.found.len(), cap: self.cap });
        }
        Ok(())
    }

    /// All elementary circuits through `s` within `in_scope`.
    fn circuits_from(&mut self, s: u32) -> Result<(), DepgraphError> {
        let mut path = vec![s];
        self.blocked.insert(s as usize);
        // (vertex, next successor index, found a circuit below)
        let mut frames: Vec<(u32, usize, bool)> = vec![(s, 0, false)];
        while let Some(top) = frames.last_mut() {
            let v = top.0;
            let succ = &self.graph.succ[v as usize];
            if top.1 < succ.len() {
                let w = succ[top.1];
                top.1 += 1;
                if !self.in_scope.contains(w as usize) {
                    continue;
                }
                if w == s {
                    top.2 = true;
                    self.record(&path)?;
                } else if !self.blocked.contains(w as usize) {
                    self.blocked.insert(w as usize);
                    path.push(w);
                    frames.push((w, 0, false));
                }
            } else {
                let (v, _, found) = frames.pop().expect("frame");
                if found {
                    self.unblock(v);
                } else {
                    for &w in &self.graph.succ[v as usize] {
                        if self.in_scope.contains(w as usize) && !self.block_map[w as usize].contains(&v) {
                            self.block_map[w as usize].push(v);
                        }
                    }
                }
                path.pop();
                if let Some(parent) = frames.last_mut() {
                    parent.2 |= found;
                }
            }
        }
        Ok(())
    }
}

fn simple_cycle_sets(graph: &DepGraph, cap: usize) -> Result<Vec<Vec<Atom>>, DepgraphError> {
    let n = graph.vertex_count();
    let mut j = Johnson {
        graph,
        in_scope: FixedBitSet::with_capacity(n),
        blocked: FixedBitSet::with_capacity(n),
        block_map: vec![Vec::new(); n],
        found: BTreeSet::new(),
        circuits: 0,
        cap,
    };
    let mut remaining = graph.all_vertices();
    for s in 0..n {
        // Least vertex s; circuits through s inside its SCC of G[s..].
        let comp = graph.sccs(&remaining).into_iter().find(|c| c.binary_search(&(s as u32)).is_ok());
        if let Some(comp) = comp {
            if graph.is_cyclic_component(&comp) {
                j.in_scope.clear();
                for &v in &comp {
                    j.in_scope.insert(v as usize);
                    j.blocked.set(v as usize, false);
                    j.block_map[v as usize].clear();
                }
                j.circuits_from(s as u32)?;
            }
        }
        remaining.set(s, false);
    }
    Ok(j.found.into_iter().collect())
}

/// Closes `base` under unions of overlapping sets. Returns `None` when
/// the closure would exceed `cap`.
fn union_closure(base: &[Vec<Atom>], n: usize, cap: usize) -> Option<Vec<Vec<Atom>>> {
    let to_bits = |set: &[Atom]| {
        let mut b = FixedBitSet::with_capacity(n);
        for a in set {
            b.insert(a.index());
        }
        b
    };
    let base_bits: Vec<FixedBitSet> = base.iter().map(|s| to_bits(s)).collect();
    let mut seen: HashSet<FixedBitSet> = base_bits.iter().cloned().collect();
    let mut queue: Vec<FixedBitSet> = base_bits.clone();
    while let Some(set) = queue.pop() {
        for b in &base_bits {
            if set.is_disjoint(b) || b.is_subset(&set) {
                continue;
            }
            let mut u = set.clone();
            u.union_with(b);
            if seen.insert(u.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push(u);
            }
        }
    }
    let mut out: Vec<Vec<Atom>> = seen.into_iter().map(|b| b.ones().map(|i| Atom(i as u32)).collect()).collect();
    out.sort();
    Some(out)
}

/// Cycle vertex sets in lexicographic order of their sorted atom ids.
///
/// Aborts with [`DepgraphError::CycleBudget`] once more than `cap` sets
/// would be reported.
pub fn enumerate_cycles(graph: &DepGraph, mode: CycleMode, cap: usize) -> Result<Vec<Vec<Atom>>, DepgraphError> {
    let simple = simple_cycle_sets(graph, cap)?;
    match mode {
        CycleMode::Simple => Ok(simple),
        CycleMode::Exhaustive => {
            union_closure(&simple, graph.vertex_count(), cap).ok_or(DepgraphError::CycleBudget { found: cap + 1, cap })
        }
    }
}

/// `ES(C)`: positive body atoms of rules with head in `C` whose positive
/// body avoids `C`.
///
/// Such rules must have single-literal bodies; longer ones are rejected
/// (see [`normalize_supports`]). Rules with an empty positive body
/// contribute nothing.
pub fn external_supports(program: &Program, cycle: &[Atom]) -> Result<Vec<Atom>, DepgraphError> {
    let in_cycle = |a: &Atom| cycle.binary_search(a).is_ok();
    let mut out = BTreeSet::new();
    for (i, rule) in program.rules().iter().enumerate() {
        let Some(h) = rule.head else { continue };
        if !in_cycle(&h) || rule.pos_body.iter().any(in_cycle) {
            continue;
        }
        if rule.body_len() >= 2 {
            return Err(DepgraphError::UnnormalizedSupport { rule: i, literals: rule.body_len() });
        }
        out.extend(rule.pos_body.iter().copied());
    }
    Ok(out.into_iter().collect())
}

/// Body literals of `λ(C)`: the cycle atoms positively, the external
/// supports negatively.
pub fn unsupported_constraint(cycle: &[Atom], supports: &[Atom]) -> Vec<Lit> {
    debug_assert!(supports.iter().all(|s| cycle.binary_search(s).is_err()));
    let mut lits: Vec<Lit> = cycle.iter().map(|&a| Lit::pos(a)).chain(supports.iter().map(|&a| Lit::neg(a))).collect();
    lits.sort_unstable();
    lits
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewrittenRule {
    pub original: usize,
    /// Index of `aux :- body.` in the normalized program.
    pub definition: usize,
    /// Index of `head :- aux.` in the normalized program.
    pub link: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportNormalization {
    pub original_atoms: usize,
    pub added_atoms: Vec<Atom>,
    pub rewritten: Vec<RewrittenRule>,
}

/// Splits every rule that can externally support a cycle but whose body is
/// not a single positive atom into `aux :- body.` and `head :- aux.`.
///
/// The auxiliary is functionally determined by the body, so supported
/// models and answer sets are preserved one-to-one. Afterwards every
/// external support of every cycle is a single atom. Rules with an empty
/// or purely negative body are split as well: their support is otherwise
/// invisible to the unsupported constraint.
pub fn normalize_supports(program: &Program) -> (Program, SupportNormalization) {
    let graph = build_depgraph(program);
    let mut out = program.clone_atoms();
    let mut info = SupportNormalization { original_atoms: program.atom_count(), ..Default::default() };

    for (i, rule) in program.rules().iter().enumerate() {
        let split = match rule.head {
            Some(h) => {
                let single_positive = rule.pos_body.len() == 1 && rule.neg_body.is_empty();
                !single_positive && graph.on_cycle_avoiding(h, &rule.pos_body)
            }
            None => false,
        };
        if !split {
            out.add_rule(rule.clone());
            continue;
        }
        let head = rule.head.expect("checked");
        let mut name = format!("{}_sup{}", program.name(head), i);
        while out.lookup(&name).is_some() {
            name.push('_');
        }
        let aux = out.intern(&name);
        info.added_atoms.push(aux);
        let definition = out.rules().len();
        out.add_rule(Rule::new(Some(aux), rule.pos_body.clone(), rule.neg_body.clone()));
        out.add_rule(Rule::new(Some(head), vec![aux], Vec::new()));
        info.rewritten.push(RewrittenRule { original: i, definition, link: definition + 1 });
    }
    (out, info)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleEntry {
    pub atoms: Vec<Atom>,
    pub supports: Vec<Atom>,
}

impl CycleEntry {
    /// `B(λ(C))`.
    pub fn constraint(&self) -> Vec<Lit> {
        unsupported_constraint(&self.atoms, &self.supports)
    }
}

/// Cycles of a program with their external supports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCatalog {
    pub mode: CycleMode,
    pub cycles: Vec<CycleEntry>,
    /// Whether `cycles` contains every closed-walk vertex set. Always true
    /// for exhaustive catalogs; for simple ones it holds when no union of
    /// overlapping simple cycles adds a new set.
    pub complete: bool,
    /// Whether the program's dependency graph is acyclic.
    pub tight: bool,
}

impl CycleCatalog {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// One line per cycle: `c <atoms…> | <supports…>`, preceded by a
    /// `%` comment carrying mode and completeness.
    pub fn to_text(&self, program: &Program) -> String {
        let mut out = format!("% cycles mode={} complete={} tight={}\n", self.mode, self.complete, self.tight);
        for entry in &self.cycles {
            out.push('c');
            for &a in &entry.atoms {
                write!(out, " {}", program.name(a)).unwrap();
            }
            out.push_str(" |");
            for &a in &entry.supports {
                write!(out, " {}", program.name(a)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, program: &Program) -> Result<CycleCatalog, DepgraphError> {
        let mut catalog = CycleCatalog { mode: CycleMode::Simple, cycles: Vec::new(), complete: false, tight: true };
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| DepgraphError::CatalogSyntax { line: i + 1, message };
            let line = line.trim();
            if let Some(meta) = line.strip_prefix("% cycles") {
                for kv in meta.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("mode", m)) => catalog.mode = m.parse().map_err(err)?,
                        Some(("complete", c)) => catalog.complete = c == "true",
                        Some(("tight", t)) => catalog.tight = t == "true",
                        _ => return Err(err(format!("unknown attribute `{kv}`"))),
                    }
                }
                continue;
            }
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            let rest = line.strip_prefix("c ").ok_or_else(|| err("expected `c <atoms> | <supports>`".into()))?;
            let (atoms, supports) = rest.split_once('|').ok_or_else(|| err("missing `|`".into()))?;
            let resolve = |names: &str| -> Result<Vec<Atom>, DepgraphError> {
                let mut v = names
                    .split_whitespace()
                    .map(|n| program.lookup(n).ok_or_else(|| err(format!("unknown atom `{n}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                v.sort_unstable();
                v.dedup();
                Ok(v)
            };
            let atoms = resolve(atoms)?;
            if atoms.is_empty() {
                return Err(err("empty cycle".into()));
            }
            catalog.tight = false;
            catalog.cycles.push(CycleEntry { atoms, supports: resolve(supports)? });
        }
        Ok(catalog)
    }
}

/// Builds the cycle catalog of a support-normalized program.
pub fn build_catalog(program: &Program, mode: CycleMode, cap: usize) -> Result<CycleCatalog, DepgraphError> {
    let graph = build_depgraph(program);
    let tight = is_tight(&graph);
    let simple = simple_cycle_sets(&graph, cap)?;
    let closure = union_closure(&simple, graph.vertex_count(), cap);
    let (sets, complete) = match mode {
        CycleMode::Exhaustive => (closure.ok_or(DepgraphError::CycleBudget { found: cap + 1, cap })?, true),
        CycleMode::Simple => {
            let complete = closure.is_some_and(|c| c.len() == simple.len());
            (simple, complete)
        }
    };
    let cycles = sets
        .into_iter()
        .map(|atoms| {
            let supports = external_supports(program, &atoms)?;
            Ok(CycleEntry { atoms, supports })
        })
        .collect::<Result<Vec<_>, DepgraphError>>()?;
    Ok(CycleCatalog { mode, cycles, complete, tight })
}
