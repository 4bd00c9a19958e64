//! Decision-DNNF compilation: branching on a static variable order with
//! unit propagation, component decomposition and a residual-formula cache,
//! followed by smoothing.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{smooth, NnfDag, NnfNode, NodeId};
use crate::completion::CnfDoc;

pub const DEFAULT_NODE_CAP: usize = 10_000_000;

const COMPILER_STACK: usize = 512 << 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum VarOrder {
    /// Variable index order.
    #[default]
    Index,
    /// Reverse of a greedy min-fill elimination order of the primal graph.
    MinFill,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileOptions {
    pub order: VarOrder,
    pub node_cap: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { order: VarOrder::Index, node_cap: DEFAULT_NODE_CAP }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileStats {
    pub decisions: u64,
    pub cache_hits: u64,
    pub component_splits: u64,
    pub nodes_created: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("compilation exceeded the node budget of {cap} nodes")]
    NodeBudget { cap: usize },
}

type Clauses = Vec<Vec<i32>>;

struct Compiler {
    nodes: Vec<NnfNode>,
    unique: HashMap<NnfNode, NodeId>,
    cache: HashMap<Clauses, NodeId>,
    rank: Vec<u32>,
    cap: usize,
    stats: CompileStats,
    truth: NodeId,
    falsity: NodeId,
}

impl Compiler {
    fn new(rank: Vec<u32>, cap: usize) -> Self {
        let mut c = Compiler {
            nodes: Vec::new(),
            unique: HashMap::new(),
            cache: HashMap::new(),
            rank,
            cap,
            stats: CompileStats::default(),
            truth: 0,
            falsity: 0,
        };
        c.truth = c.intern(NnfNode::truth()).expect("cap >= 2");
        c.falsity = c.intern(NnfNode::falsity()).expect("cap >= 2");
        c
    }

    fn intern(&mut self, node: NnfNode) -> Result<NodeId, CompileError> {
        if let Some(&id) = self.unique.get(&node) {
            return Ok(id);
        }
        if self.nodes.len() >= self.cap {
            return Err(CompileError::NodeBudget { cap: self.cap });
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node.clone());
        self.unique.insert(node, id);
        Ok(id)
    }

    fn and(&mut self, mut children: Vec<NodeId>) -> Result<NodeId, CompileError> {
        if children.contains(&self.falsity) {
            return Ok(self.falsity);
        }
        children.retain(|&c| c != self.truth);
        children.sort_unstable();
        children.dedup();
        match children.len() {
            0 => Ok(self.truth),
            1 => Ok(children[0]),
            _ => self.intern(NnfNode::And(children)),
        }
    }

    fn lit(&mut self, l: i32) -> Result<NodeId, CompileError> {
        self.intern(NnfNode::Lit(l))
    }

    fn compile_set(&mut self, clauses: Clauses) -> Result<NodeId, CompileError> {
        if clauses.is_empty() {
            return Ok(self.truth);
        }
        if let Some(&id) = self.cache.get(&clauses) {
            self.stats.cache_hits += 1;
            return Ok(id);
        }
        let comps = components(&clauses);
        let id = if comps.len() > 1 {
            self.stats.component_splits += 1;
            let mut children = Vec::with_capacity(comps.len());
            for comp in comps {
                let c = self.compile_set(comp)?;
                if c == self.falsity {
                    children = vec![c];
                    break;
                }
                children.push(c);
            }
            self.and(children)?
        } else {
            self.decide(&clauses)?
        };
        self.cache.insert(clauses, id);
        Ok(id)
    }

    fn decide(&mut self, clauses: &Clauses) -> Result<NodeId, CompileError> {
        let v = clauses
            .iter()
            .flatten()
            .map(|l| l.unsigned_abs())
            .min_by_key(|&v| (self.rank[v as usize], v))
            .expect("non-empty clause set");
        self.stats.decisions += 1;
        let mut branches = Vec::with_capacity(2);
        for lit in [v as i32, -(v as i32)] {
            let Some((implied, residual)) = propagate(clauses, &[lit]) else { continue };
            let sub = self.compile_set(residual)?;
            if sub == self.falsity {
                continue;
            }
            let mut parts = Vec::with_capacity(implied.len() + 1);
            for l in implied {
                parts.push(self.lit(l)?);
            }
            parts.push(sub);
            branches.push(self.and(parts)?);
        }
        match branches.len() {
            0 => Ok(self.falsity),
            1 => Ok(branches[0]),
            _ => self.intern(NnfNode::Or { decision: v, children: branches }),
        }
    }
}

/// Assigns `seeds` and propagates units, including those already present
/// in `clauses`. Returns the implied literals (seeds included) and the
/// canonical residual clause set, or `None` on conflict.
fn propagate(clauses: &[Vec<i32>], seeds: &[i32]) -> Option<(Vec<i32>, Clauses)> {
    let mut assigned: HashMap<u32, bool> = HashMap::new();
    let mut implied = Vec::new();
    let mut pending = seeds.to_vec();
    let mut current: Clauses = clauses.to_vec();
    loop {
        for l in pending.drain(..) {
            match assigned.insert(l.unsigned_abs(), l > 0) {
                Some(prev) if prev != (l > 0) => return None,
                Some(_) => {}
                None => implied.push(l),
            }
        }
        let mut residual = Vec::with_capacity(current.len());
        for clause in &current {
            let mut rest = Vec::with_capacity(clause.len());
            let mut sat = false;
            for &l in clause {
                match assigned.get(&l.unsigned_abs()) {
                    Some(&val) if val == (l > 0) => {
                        sat = true;
                        break;
                    }
                    Some(_) => {}
                    None => rest.push(l),
                }
            }
            if sat {
                continue;
            }
            match rest.len() {
                0 => return None,
                1 => pending.push(rest[0]),
                _ => residual.push(rest),
            }
        }
        current = residual;
        if pending.is_empty() {
            current.sort();
            current.dedup();
            implied.sort_unstable_by_key(|l| l.unsigned_abs());
            return Some((implied, current));
        }
    }
}

fn components(clauses: &Clauses) -> Vec<Clauses> {
    let mut index: HashMap<u32, usize> = HashMap::new();
    for l in clauses.iter().flatten() {
        let next = index.len();
        index.entry(l.unsigned_abs()).or_insert(next);
    }
    let mut parent: Vec<usize> = (0..index.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for clause in clauses {
        let first = index[&clause[0].unsigned_abs()];
        for l in &clause[1..] {
            let (a, b) = (find(&mut parent, first), find(&mut parent, index[&l.unsigned_abs()]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: HashMap<usize, Clauses> = HashMap::new();
    let mut order = Vec::new();
    for clause in clauses {
        let r = find(&mut parent, index[&clause[0].unsigned_abs()]);
        groups
            .entry(r)
            .or_insert_with(|| {
                order.push(r);
                Vec::new()
            })
            .push(clause.clone());
    }
    order.into_iter().map(|r| groups.remove(&r).expect("group")).collect()
}

/// Decision order from a greedy min-fill elimination of the primal graph;
/// the variable eliminated last is decided first. Ties go to the smaller
/// index.
pub fn min_fill_order(cnf: &CnfDoc) -> Vec<u32> {
    let n = cnf.num_vars as usize;
    let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n + 1];
    for clause in &cnf.clauses {
        for &a in clause {
            for &b in clause {
                let (a, b) = (a.unsigned_abs(), b.unsigned_abs());
                if a != b {
                    adj[a as usize].insert(b);
                }
            }
        }
    }
    let mut alive: BTreeSet<u32> = (1..=n as u32).collect();
    let mut elimination = Vec::with_capacity(n);
    while !alive.is_empty() {
        let fill = |v: u32| {
            let ns: Vec<u32> = adj[v as usize].iter().copied().collect();
            let mut missing = 0usize;
            for (i, &a) in ns.iter().enumerate() {
                for &b in &ns[i + 1..] {
                    if !adj[a as usize].contains(&b) {
                        missing += 1;
                    }
                }
            }
            missing
        };
        let v = *alive.iter().min_by_key(|&&v| (fill(v), v)).expect("non-empty");
        let ns: Vec<u32> = adj[v as usize].iter().copied().collect();
        for &a in &ns {
            adj[a as usize].remove(&v);
            for &b in &ns {
                if a != b {
                    adj[a as usize].insert(b);
                }
            }
        }
        adj[v as usize].clear();
        alive.remove(&v);
        elimination.push(v);
    }
    elimination.reverse();
    elimination
}

/// Compiles `cnf` into a smooth decision-DNNF over all its variables. An
/// unsatisfiable formula yields the false DAG.
pub fn compile(cnf: &CnfDoc, opts: &CompileOptions) -> Result<(NnfDag, CompileStats), CompileError> {
    let n = cnf.num_vars;
    let order: Vec<u32> = match opts.order {
        VarOrder::Index => (1..=n).collect(),
        VarOrder::MinFill => min_fill_order(cnf),
    };
    let mut rank = vec![0u32; n as usize + 1];
    for (i, &v) in order.iter().enumerate() {
        rank[v as usize] = i as u32;
    }
    let mut clauses: Clauses = Vec::with_capacity(cnf.clauses.len());
    for clause in &cnf.clauses {
        let mut c = clause.clone();
        c.sort_unstable();
        c.dedup();
        if c.iter().any(|l| c.binary_search(&-l).is_ok()) {
            continue;
        }
        clauses.push(c);
    }
    let cap = opts.node_cap.max(2);

    // Recursion depth grows with the number of decisions on a path.
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("nnf-compile".into())
            .stack_size(COMPILER_STACK)
            .spawn_scoped(s, move || {
                let mut c = Compiler::new(rank, cap);
                let mut clauses = clauses;
                clauses.sort();
                clauses.dedup();
                let root = match propagate(&clauses, &[]) {
                    None => c.falsity,
                    Some((implied, residual)) => {
                        let mut parts = vec![c.compile_set(residual)?];
                        for l in implied {
                            parts.push(c.lit(l)?);
                        }
                        c.and(parts)?
                    }
                };
                c.stats.nodes_created = c.nodes.len();
                let dag = NnfDag::new(c.nodes, root, n).trimmed();
                Ok((smooth(&dag), c.stats))
            })
            .expect("spawn compiler thread")
            .join()
            .expect("compiler thread panicked")
    })
}
