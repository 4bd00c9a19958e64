//! Negation normal form DAGs in the `nnf v e n` exchange format.

use std::collections::HashMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

mod compile;

pub use compile::{compile, min_fill_order, CompileError, CompileOptions, CompileStats, VarOrder, DEFAULT_NODE_CAP};

pub type NodeId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NnfNode {
    /// DIMACS literal: `v` or `-v`.
    Lit(i32),
    /// Conjunction; `And([])` is true.
    And(Vec<NodeId>),
    /// Disjunction with its decision variable (0 if unknown); `Or` with no
    /// children is false.
    Or { decision: u32, children: Vec<NodeId> },
}

impl NnfNode {
    pub fn children(&self) -> &[NodeId] {
        match self {
            NnfNode::Lit(_) => &[],
            NnfNode::And(c) | NnfNode::Or { children: c, .. } => c,
        }
    }

    pub fn truth() -> Self {
        NnfNode::And(Vec::new())
    }

    pub fn falsity() -> Self {
        NnfNode::Or { decision: 0, children: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NnfError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: node {node} references node {child}, which is not defined before it")]
    ForwardReference { line: usize, node: u32, child: u32 },
    #[error("line {line}: node {node} references node {child}, beyond the declared {declared} nodes")]
    Dangling { line: usize, node: u32, child: u32, declared: u32 },
}

/// A rooted NNF DAG whose children always precede their parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NnfDag {
    nodes: Vec<NnfNode>,
    root: NodeId,
    num_vars: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Validation {
    pub decomposable: bool,
    pub deterministic: bool,
    pub smooth: bool,
}

impl Validation {
    pub fn all(&self) -> bool {
        self.decomposable && self.deterministic && self.smooth
    }
}

impl NnfDag {
    /// Panics if a child does not precede its parent or the root is out
    /// of range.
    pub fn new(nodes: Vec<NnfNode>, root: NodeId, num_vars: u32) -> Self {
        for (i, n) in nodes.iter().enumerate() {
            assert!(n.children().iter().all(|&c| (c as usize) < i), "node {i} is not topologically ordered");
            if let NnfNode::Lit(l) = n {
                assert!(*l != 0 && l.unsigned_abs() <= num_vars, "literal {l} out of range");
            }
        }
        assert!((root as usize) < nodes.len(), "root out of range");
        NnfDag { nodes, root, num_vars }
    }

    /// The DAG consisting of the constant false.
    pub fn falsity(num_vars: u32) -> Self {
        NnfDag { nodes: vec![NnfNode::falsity()], root: 0, num_vars }
    }

    pub fn nodes(&self) -> &[NnfNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NnfNode {
        &self.nodes[id as usize]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `|φ|`: the number of edges.
    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children().len()).sum()
    }

    pub fn is_false(&self) -> bool {
        matches!(self.node(self.root), NnfNode::Or { children, .. } if children.is_empty())
    }

    /// Keeps only nodes reachable from the root, renumbered in the same
    /// relative order; the root becomes the last node.
    pub fn trimmed(&self) -> NnfDag {
        let mut reach = vec![false; self.nodes.len()];
        reach[self.root as usize] = true;
        for i in (0..self.nodes.len()).rev() {
            if reach[i] {
                for &c in self.nodes[i].children() {
                    reach[c as usize] = true;
                }
            }
        }
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if !reach[i] {
                continue;
            }
            remap[i] = nodes.len() as u32;
            let map = |cs: &[NodeId]| cs.iter().map(|&c| remap[c as usize]).collect::<Vec<_>>();
            nodes.push(match node {
                NnfNode::Lit(l) => NnfNode::Lit(*l),
                NnfNode::And(cs) => NnfNode::And(map(cs)),
                NnfNode::Or { decision, children } => NnfNode::Or { decision: *decision, children: map(children) },
            });
        }
        let root = remap[self.root as usize];
        debug_assert_eq!(root as usize, nodes.len() - 1);
        NnfDag { nodes, root, num_vars: self.num_vars }
    }

    /// Variable set of every node.
    pub fn var_sets(&self) -> Vec<FixedBitSet> {
        let width = self.num_vars as usize + 1;
        let mut sets: Vec<FixedBitSet> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let mut s = FixedBitSet::with_capacity(width);
            match node {
                NnfNode::Lit(l) => s.insert(l.unsigned_abs() as usize),
                _ => {
                    for &c in node.children() {
                        s.union_with(&sets[c as usize]);
                    }
                }
            }
            sets.push(s);
        }
        sets
    }

    fn branch_literal(&self, child: NodeId, var: u32) -> Option<bool> {
        let has = |id: NodeId| match self.node(id) {
            NnfNode::Lit(l) if l.unsigned_abs() == var => Some(*l > 0),
            _ => None,
        };
        match self.node(child) {
            NnfNode::Lit(_) => has(child),
            NnfNode::And(cs) => cs.iter().find_map(|&c| has(c)),
            NnfNode::Or { .. } => None,
        }
    }

    fn is_decision(&self, node: &NnfNode) -> bool {
        let NnfNode::Or { decision, children } = node else { return true };
        if children.len() < 2 {
            return true;
        }
        if children.len() > 2 {
            return false;
        }
        let check = |v: u32| {
            matches!(
                (self.branch_literal(children[0], v), self.branch_literal(children[1], v)),
                (Some(a), Some(b)) if a != b
            )
        };
        if *decision != 0 {
            return check(*decision);
        }
        // Unannotated: any variable the first branch fixes directly.
        let candidates: Vec<u32> = match self.node(children[0]) {
            NnfNode::Lit(l) => vec![l.unsigned_abs()],
            NnfNode::And(cs) => cs
                .iter()
                .filter_map(|&c| match self.node(c) {
                    NnfNode::Lit(l) => Some(l.unsigned_abs()),
                    _ => None,
                })
                .collect(),
            NnfNode::Or { .. } => Vec::new(),
        };
        candidates.into_iter().any(check)
    }

    /// Checks decomposability, decision-form determinism and smoothness of
    /// every reachable node.
    pub fn validate(&self) -> Validation {
        let sets = self.var_sets();
        let mut reach = vec![false; self.nodes.len()];
        reach[self.root as usize] = true;
        let mut v = Validation { decomposable: true, deterministic: true, smooth: true };
        for i in (0..self.nodes.len()).rev() {
            if !reach[i] {
                continue;
            }
            let node = &self.nodes[i];
            for &c in node.children() {
                reach[c as usize] = true;
            }
            match node {
                NnfNode::Lit(_) => {}
                NnfNode::And(cs) => {
                    let mut seen = FixedBitSet::with_capacity(self.num_vars as usize + 1);
                    for &c in cs {
                        let s = &sets[c as usize];
                        if !seen.is_disjoint(s) {
                            v.decomposable = false;
                        }
                        seen.union_with(s);
                    }
                }
                NnfNode::Or { children, .. } => {
                    if !self.is_decision(node) {
                        v.deterministic = false;
                    }
                    if children.iter().any(|&c| sets[c as usize] != sets[i]) {
                        v.smooth = false;
                    }
                }
            }
        }
        v
    }

    /// Graph value of the root over all variables: literals count 1, `And`
    /// multiplies, `Or` adds. On a valid sd-DNNF covering every variable
    /// this is the model count.
    pub fn graph_value(&self) -> BigUint {
        let mut vals: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                NnfNode::Lit(_) => BigUint::one(),
                NnfNode::And(cs) => cs.iter().fold(BigUint::one(), |acc, &c| acc * &vals[c as usize]),
                NnfNode::Or { children, .. } => {
                    children.iter().fold(BigUint::zero(), |acc, &c| acc + &vals[c as usize])
                }
            };
            vals.push(v);
        }
        vals.swap_remove(self.root as usize)
    }

    /// Model count over `num_vars` variables: the root value times two for
    /// every variable the root does not mention.
    pub fn model_count(&self) -> BigUint {
        let sets = self.var_sets();
        let free = self.num_vars as usize - sets[self.root as usize].count_ones(1..);
        self.graph_value() << free
    }

    pub fn to_text(&self) -> String {
        let dag = if self.root as usize == self.nodes.len() - 1 { None } else { Some(self.trimmed()) };
        let d = dag.as_ref().unwrap_or(self);
        let mut out = format!("nnf {} {} {}\n", d.node_count(), d.edge_count(), d.num_vars);
        for node in &d.nodes {
            match node {
                NnfNode::Lit(l) => writeln!(out, "L {l}").unwrap(),
                NnfNode::And(cs) => {
                    write!(out, "A {}", cs.len()).unwrap();
                    for c in cs {
                        write!(out, " {c}").unwrap();
                    }
                    out.push('\n');
                }
                NnfNode::Or { decision, children } => {
                    write!(out, "O {} {}", decision, children.len()).unwrap();
                    for c in children {
                        write!(out, " {c}").unwrap();
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Parses the exchange format. The last node is the root.
pub fn parse_nnf(text: &str) -> Result<NnfDag, NnfError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with("c ") && *l != "c");
    let syntax = |line: usize, message: &str| NnfError::Syntax { line, message: message.to_owned() };
    let (hl, header) = lines.next().ok_or_else(|| syntax(1, "missing `nnf` header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "nnf" {
        return Err(syntax(hl, "header must be `nnf <nodes> <edges> <vars>`"));
    }
    let num = |s: &str, line: usize| s.parse::<u32>().map_err(|_| syntax(line, &format!("invalid number `{s}`")));
    let (declared, edges, num_vars) = (num(h[1], hl)?, num(h[2], hl)?, num(h[3], hl)?);

    let mut nodes: Vec<NnfNode> = Vec::with_capacity(declared as usize);
    let mut last_line = hl;
    for (ln, line) in lines {
        last_line = ln;
        let id = nodes.len() as u32;
        if id >= declared {
            return Err(syntax(ln, &format!("more than the declared {declared} nodes")));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let children = |toks: &[&str]| -> Result<Vec<NodeId>, NnfError> {
            let count = num(toks.first().ok_or_else(|| syntax(ln, "missing child count"))?, ln)? as usize;
            if toks.len() - 1 != count {
                return Err(syntax(ln, &format!("expected {count} children, found {}", toks.len() - 1)));
            }
            toks[1..]
                .iter()
                .map(|t| {
                    let c = num(t, ln)?;
                    if c >= declared {
                        Err(NnfError::Dangling { line: ln, node: id, child: c, declared })
                    } else if c >= id {
                        Err(NnfError::ForwardReference { line: ln, node: id, child: c })
                    } else {
                        Ok(c)
                    }
                })
                .collect()
        };
        let node = match toks[0] {
            "L" => {
                if toks.len() != 2 {
                    return Err(syntax(ln, "expected `L <literal>`"));
                }
                let l: i32 = toks[1].parse().map_err(|_| syntax(ln, "invalid literal"))?;
                if l == 0 || l.unsigned_abs() > num_vars {
                    return Err(syntax(ln, &format!("literal {l} outside 1..={num_vars}")));
                }
                NnfNode::Lit(l)
            }
            "A" => NnfNode::And(children(&toks[1..])?),
            "O" => {
                if toks.len() < 3 {
                    return Err(syntax(ln, "expected `O <var> <count> <ids…>`"));
                }
                let decision = num(toks[1], ln)?;
                if decision > num_vars {
                    return Err(syntax(ln, "decision variable out of range"));
                }
                NnfNode::Or { decision, children: children(&toks[2..])? }
            }
            other => return Err(syntax(ln, &format!("unknown node kind `{other}`"))),
        };
        nodes.push(node);
    }
    if nodes.len() as u32 != declared {
        return Err(syntax(last_line, &format!("declared {declared} nodes, found {}", nodes.len())));
    }
    if nodes.is_empty() {
        return Err(syntax(hl, "empty DAG"));
    }
    let dag = NnfDag { root: declared - 1, nodes, num_vars };
    if dag.edge_count() != edges as usize {
        return Err(syntax(hl, &format!("declared {edges} edges, found {}", dag.edge_count())));
    }
    Ok(dag)
}

/// Makes every `Or` smooth by conjoining `(v ∨ ¬v)` for each variable a
/// child lacks, and extends the root to all `num_vars` variables. Returns
/// a structurally identical DAG when nothing is missing.
pub fn smooth(dag: &NnfDag) -> NnfDag {
    let sets = dag.var_sets();
    let mut nodes = dag.nodes.clone();
    let mut lits: HashMap<i32, NodeId> = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if let NnfNode::Lit(l) = n {
            lits.entry(*l).or_insert(i as NodeId);
        }
    }
    let mut gadgets: HashMap<u32, NodeId> = HashMap::new();
    let mut appended: Vec<NnfNode> = Vec::new();
    let base = nodes.len() as NodeId;

    // New nodes are appended after the originals, so ids are final once
    // the original nodes are rewritten in a second step.
    let push = |appended: &mut Vec<NnfNode>, node: NnfNode| -> NodeId {
        appended.push(node);
        base + appended.len() as NodeId - 1
    };
    let mut gadget = |appended: &mut Vec<NnfNode>, v: u32| -> NodeId {
        if let Some(&g) = gadgets.get(&v) {
            return g;
        }
        let p = match lits.get(&(v as i32)) {
            Some(&id) => id,
            None => {
                let id = push(appended, NnfNode::Lit(v as i32));
                lits.insert(v as i32, id);
                id
            }
        };
        let n = match lits.get(&-(v as i32)) {
            Some(&id) => id,
            None => {
                let id = push(appended, NnfNode::Lit(-(v as i32)));
                lits.insert(-(v as i32), id);
                id
            }
        };
        let g = push(appended, NnfNode::Or { decision: v, children: vec![p, n] });
        gadgets.insert(v, g);
        g
    };

    // Pad each Or child with the gadgets it misses.
    let mut rewrites: Vec<(usize, Vec<NodeId>)> = Vec::new();
    for (i, node) in dag.nodes.iter().enumerate() {
        let NnfNode::Or { children, .. } = node else { continue };
        let mut new_children = children.clone();
        let mut changed = false;
        for c in new_children.iter_mut() {
            let missing: Vec<u32> = sets[i].difference(&sets[*c as usize]).map(|v| v as u32).collect();
            if missing.is_empty() {
                continue;
            }
            // Flatten into an existing And so a decision literal stays a
            // direct child of the branch.
            let mut parts = match &dag.nodes[*c as usize] {
                NnfNode::And(cs) => cs.clone(),
                _ => vec![*c],
            };
            parts.extend(missing.into_iter().map(|v| gadget(&mut appended, v)));
            *c = push(&mut appended, NnfNode::And(parts));
            changed = true;
        }
        if changed {
            rewrites.push((i, new_children));
        }
    }
    let mut root = dag.root;
    let mut all = FixedBitSet::with_capacity(dag.num_vars as usize + 1);
    all.insert_range(1..);
    let missing: Vec<u32> = all.difference(&sets[root as usize]).map(|v| v as u32).collect();
    if !missing.is_empty() && !dag.is_false() {
        let mut parts = vec![root];
        parts.extend(missing.into_iter().map(|v| gadget(&mut appended, v)));
        root = push(&mut appended, NnfNode::And(parts));
    }
    if appended.is_empty() {
        return dag.clone();
    }

    // Rewritten Or nodes now point at appended nodes; move every node into
    // a fresh topological order.
    for (i, cs) in rewrites {
        if let NnfNode::Or { children, .. } = &mut nodes[i] {
            *children = cs;
        }
    }
    nodes.extend(appended);
    toposort(nodes, root, dag.num_vars)
}

/// Reorders `nodes` (children may follow parents) into a topological
/// order, dropping unreachable nodes.
fn toposort(nodes: Vec<NnfNode>, root: NodeId, num_vars: u32) -> NnfDag {
    let mut order = Vec::with_capacity(nodes.len());
    let mut state = vec![0u8; nodes.len()];
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    state[root as usize] = 1;
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        let cs = nodes[v as usize].children();
        if *next < cs.len() {
            let c = cs[*next];
            *next += 1;
            if state[c as usize] == 0 {
                state[c as usize] = 1;
                stack.push((c, 0));
            }
        } else {
            state[v as usize] = 2;
            order.push(v);
            stack.pop();
        }
    }
    let mut remap = vec![u32::MAX; nodes.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old as usize] = new as u32;
    }
    let mut nodes: Vec<Option<NnfNode>> = nodes.into_iter().map(Some).collect();
    let out = order
        .iter()
        .map(|&old| {
            let map = |cs: Vec<NodeId>| cs.into_iter().map(|c| remap[c as usize]).collect();
            match nodes[old as usize].take().expect("visited once") {
                NnfNode::Lit(l) => NnfNode::Lit(l),
                NnfNode::And(cs) => NnfNode::And(map(cs)),
                NnfNode::Or { decision, children } => NnfNode::Or { decision, children: map(children) },
            }
        })
        .collect::<Vec<_>>();
    let root = remap[root as usize];
    NnfDag::new(out, root, num_vars)
}

/// Checks every assignment; for tests on small DAGs.
pub fn brute_force_models(dag: &NnfDag) -> u64 {
    let n = dag.num_vars;
    assert!(n <= 24, "brute force limited to 24 variables");
    let mut count = 0;
    let mut val = vec![false; dag.nodes.len()];
    for mask in 0u32..1 << n {
        for (i, node) in dag.nodes.iter().enumerate() {
            val[i] = match node {
                NnfNode::Lit(l) => (mask >> (l.unsigned_abs() - 1) & 1 == 1) == (*l > 0),
                NnfNode::And(cs) => cs.iter().all(|&c| val[c as usize]),
                NnfNode::Or { children, .. } => children.iter().any(|&c| val[c as usize]),
            };
        }
        if val[dag.root as usize] {
            count += 1;
        }
    }
    count
}

/// Fig.-1-style fixture: `((x3 ∧ ¬c) ∨ (¬x3 ∧ c)) ∧ (¬x1 ∧ ¬x2 ∧ ¬x5 ∧ a ∧ b)`
/// with `a=1, b=2, c=3, x1=4, x2=5, x3=6, x5=7`.
pub const FIGURE1_NNF: &str = "nnf 14 13 7
L 6
L -3
L -6
L 3
A 2 0 1
A 2 2 3
O 6 2 4 5
L -4
L -5
L -7
L 2
L 1
A 5 7 8 9 10 11
A 2 6 12
";

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(text: &str) -> NnfDag {
        parse_nnf(text).unwrap()
    }

    #[test]
    fn figure1_round_trip() {
        let d = dag(FIGURE1_NNF);
        assert_eq!(d.node_count(), 14);
        assert_eq!(d.edge_count(), 13);
        assert_eq!(d.num_vars(), 7);
        assert_eq!(d.to_text(), FIGURE1_NNF);
        assert_eq!(parse_nnf(&d.to_text()).unwrap(), d);
        assert!(d.validate().all());
        assert_eq!(d.model_count(), BigUint::from(2u32));
        assert_eq!(brute_force_models(&d), 2);
    }

    #[test]
    fn smallest_file() {
        let d = dag("nnf 1 0 1\nL 1\n");
        assert_eq!((d.node_count(), d.edge_count()), (1, 0));
        assert_eq!(d.model_count(), BigUint::one());
        assert_eq!(smooth(&d), d);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_nnf("nnf 2 1 1\nL 1\nA 1 2\n"), Err(NnfError::Dangling { child: 2, .. })));
        assert!(matches!(
            parse_nnf("nnf 2 1 1\nA 1 1\nL 1\n"),
            Err(NnfError::ForwardReference { node: 0, child: 1, .. })
        ));
        assert!(matches!(
            parse_nnf("nnf 2 1 1\nL 1\nA 1 1\n"),
            Err(NnfError::ForwardReference { node: 1, child: 1, .. })
        ));
        assert!(parse_nnf("cnf 1 0 1\nL 1\n").is_err());
        assert!(parse_nnf("nnf 1 0 1\nL 2\n").is_err());
        assert!(parse_nnf("nnf 2 0 1\nL 1\n").is_err());
        assert!(parse_nnf("nnf 2 5 1\nL 1\nA 1 0\n").is_err());
        assert!(parse_nnf("nnf 1 0 1\nX 1\n").is_err());
        assert!(parse_nnf("nnf 2 2 1\nL 1\nA 2 0\n").is_err());
    }

    #[test]
    fn constants() {
        let t = dag("nnf 1 0 2\nA 0\n");
        assert_eq!(t.model_count(), BigUint::from(4u32));
        let f = dag("nnf 1 0 2\nO 0 0\n");
        assert!(f.is_false());
        assert_eq!(f.model_count(), BigUint::zero());
        assert_eq!(smooth(&f), f);
        assert_eq!(smooth(&t).graph_value(), BigUint::from(4u32));
    }

    #[test]
    fn validation_flags() {
        // Or(a ∧ b, a)
        let d = dag("nnf 4 4 2\nL 1\nL 2\nA 2 0 1\nO 0 2 2 0\n");
        let v = d.validate();
        assert!(!v.smooth);
        assert!(v.decomposable);
        // And(a, a ∨ b)
        let d = dag("nnf 4 4 2\nL 1\nL 2\nO 0 2 0 1\nA 2 0 2\n");
        let v = d.validate();
        assert!(!v.decomposable);
        assert!(!v.deterministic);
        // Or(a, ¬a) with and without decision annotation
        assert!(dag("nnf 3 2 1\nL 1\nL -1\nO 1 2 0 1\n").validate().all());
        assert!(dag("nnf 3 2 1\nL 1\nL -1\nO 0 2 0 1\n").validate().deterministic);
        assert!(!dag("nnf 3 2 2\nL 1\nL -1\nO 2 2 0 1\n").validate().deterministic);
    }

    #[test]
    fn smoothing_structure() {
        // Or(a ∧ b, a) becomes Or(a ∧ b, a ∧ (b ∨ ¬b)); graph value 1 + 2.
        let d = dag("nnf 4 4 2\nL 1\nL 2\nA 2 0 1\nO 0 2 2 0\n");
        let s = smooth(&d);
        assert!(s.validate().smooth);
        assert_eq!(s.graph_value(), BigUint::from(3u32));
        let NnfNode::Or { children, .. } = s.node(s.root()) else { panic!() };
        let NnfNode::And(parts) = s.node(children[1]) else { panic!() };
        assert_eq!(s.node(parts[0]), &NnfNode::Lit(1));
        assert!(matches!(s.node(parts[1]), NnfNode::Or { decision: 2, .. }));
    }

    #[test]
    fn smoothing_preserves_count_of_deterministic_dag() {
        // Or(a ∧ b, ¬a): models ab, ¬a b, ¬a ¬b.
        let d = dag("nnf 5 4 2\nL 1\nL 2\nA 2 0 1\nL -1\nO 1 2 2 3\n");
        assert!(!d.validate().smooth);
        let s = smooth(&d);
        assert!(s.validate().all());
        assert_eq!(brute_force_models(&d), 3);
        assert_eq!(s.graph_value(), BigUint::from(3u32));
        assert_eq!(smooth(&s), s);
        assert_eq!(smooth(&dag(FIGURE1_NNF)), dag(FIGURE1_NNF));
    }

    #[test]
    fn smoothing_extends_root() {
        let d = dag("nnf 1 0 3\nL 2\n");
        let s = smooth(&d);
        assert_eq!(s.graph_value(), BigUint::from(4u32));
        assert_eq!(brute_force_models(&s), 4);
        assert!(s.validate().all());
    }
}
