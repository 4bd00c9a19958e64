//! Counting graphs over sd-DNNFs, conditioning and compression.
//!
//! Literal nodes are worth 1, or 0 when the assumptions contradict them;
//! `Or` nodes add and `And` nodes multiply their children. Compression
//! removes the literals of auxiliary variables in one bottom-up pass and
//! drops the dead nodes in a second one.

use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::completion::{CnfDoc, VarKind};
use crate::lp::{AssumptionSet, Atom, Lit};
use crate::nnf::{NnfDag, NnfNode, Validation};

#[derive(Debug, Error)]
pub enum CountingError {
    #[error("refusing to count on a DAG that is not an sd-DNNF ({0:?})")]
    NotSdDnnf(Validation),
    #[error("NNF has {nnf} variables but the CNF has {cnf}")]
    VariableMismatch { nnf: u32, cnf: u32 },
    #[error("assumption mentions atom {0}, which the graph does not know")]
    UnknownAtom(u32),
    #[error("malformed .ccg data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CNode {
    /// DIMACS literal over the graph's variables.
    Lit(i32),
    And(Vec<u32>),
    Or(Vec<u32>),
    Const(bool),
}

impl CNode {
    fn children(&self) -> &[u32] {
        match self {
            CNode::And(c) | CNode::Or(c) => c,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Circuit {
    nodes: Vec<CNode>,
    root: u32,
    /// `var_atom[v - 1]`: the program atom behind variable `v`.
    var_atom: Vec<Option<Atom>>,
    /// `atom_var[a]`: the variable of atom `a`.
    atom_var: Vec<Option<u32>>,
    fits_u128: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub node_count: usize,
    pub edge_count: usize,
}

/// Per-variable forced values derived from an assumption set.
#[derive(Clone, Debug)]
pub struct Conditioning {
    forced: Vec<Option<bool>>,
}

impl Circuit {
    fn build(nodes: Vec<CNode>, root: u32, var_atom: Vec<Option<Atom>>) -> Self {
        let atoms = var_atom.iter().flatten().map(|a| a.index() + 1).max().unwrap_or(0);
        let mut atom_var = vec![None; atoms];
        for (i, a) in var_atom.iter().enumerate() {
            if let Some(a) = a {
                atom_var[a.index()] = Some(i as u32 + 1);
            }
        }
        let mut c = Circuit { nodes, root, var_atom, atom_var, fits_u128: false };
        // Conditioning only lowers node values, so the unconditioned pass
        // decides whether every later evaluation fits.
        let free = Conditioning { forced: vec![None; c.var_atom.len() + 1] };
        c.fits_u128 = c.eval_u128(&free).is_some();
        c
    }

    fn size(&self) -> SizeReport {
        SizeReport { node_count: self.nodes.len(), edge_count: self.nodes.iter().map(|n| n.children().len()).sum() }
    }

    fn condition<'a>(&self, lits: impl IntoIterator<Item = &'a Lit>) -> Result<Option<Conditioning>, CountingError> {
        let mut forced = vec![None; self.var_atom.len() + 1];
        for lit in lits {
            let var =
                self.atom_var.get(lit.atom.index()).copied().flatten().ok_or(CountingError::UnknownAtom(lit.atom.0))?;
            match forced[var as usize] {
                Some(v) if v != lit.positive => return Ok(None),
                _ => forced[var as usize] = Some(lit.positive),
            }
        }
        Ok(Some(Conditioning { forced }))
    }

    fn leaf(&self, l: i32, cond: &Conditioning) -> bool {
        match cond.forced[l.unsigned_abs() as usize] {
            Some(v) => v == (l > 0),
            None => true,
        }
    }

    fn eval_u128(&self, cond: &Conditioning) -> Option<u128> {
        let mut vals: Vec<u128> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                CNode::Lit(l) => self.leaf(*l, cond) as u128,
                CNode::Const(b) => *b as u128,
                CNode::And(cs) => {
                    let mut acc = 1u128;
                    for &c in cs {
                        acc = acc.checked_mul(vals[c as usize])?;
                    }
                    acc
                }
                CNode::Or(cs) => {
                    let mut acc = 0u128;
                    for &c in cs {
                        acc = acc.checked_add(vals[c as usize])?;
                    }
                    acc
                }
            };
            vals.push(v);
        }
        Some(vals[self.root as usize])
    }

    fn eval_big(&self, cond: &Conditioning) -> BigUint {
        let mut vals: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                CNode::Lit(l) => BigUint::from(self.leaf(*l, cond) as u8),
                CNode::Const(b) => BigUint::from(*b as u8),
                CNode::And(cs) => {
                    let mut acc = BigUint::one();
                    for &c in cs {
                        if acc.is_zero() {
                            break;
                        }
                        acc *= &vals[c as usize];
                    }
                    acc
                }
                CNode::Or(cs) => cs.iter().fold(BigUint::zero(), |acc, &c| acc + &vals[c as usize]),
            };
            vals.push(v);
        }
        vals.swap_remove(self.root as usize)
    }

    /// One pass over all nodes; the second value is the number of nodes
    /// visited.
    fn eval(&self, cond: &Conditioning) -> (BigUint, usize) {
        let v = if self.fits_u128 {
            BigUint::from(self.eval_u128(cond).expect("bounded by the unconditioned value"))
        } else {
            self.eval_big(cond)
        };
        (v, self.nodes.len())
    }
}

/// The counting graph `G(φ)` of a validated sd-DNNF.
#[derive(Clone, Debug)]
pub struct CountingGraph {
    dag: NnfDag,
    circuit: Circuit,
}

impl CountingGraph {
    /// Refuses DAGs that are not decomposable, deterministic and smooth.
    pub fn new(dag: NnfDag, cnf: &CnfDoc) -> Result<Self, CountingError> {
        if dag.num_vars() != cnf.num_vars {
            return Err(CountingError::VariableMismatch { nnf: dag.num_vars(), cnf: cnf.num_vars });
        }
        let validation = dag.validate();
        if !validation.all() && !dag.is_false() {
            return Err(CountingError::NotSdDnnf(validation));
        }
        let var_atom = (1..=cnf.num_vars)
            .map(|v| match cnf.kind(v) {
                VarKind::Atom(a) => Some(a),
                VarKind::Aux => None,
            })
            .collect();
        let nodes = dag
            .nodes()
            .iter()
            .map(|n| match n {
                NnfNode::Lit(l) => CNode::Lit(*l),
                NnfNode::And(cs) if cs.is_empty() => CNode::Const(true),
                NnfNode::Or { children, .. } if children.is_empty() => CNode::Const(false),
                NnfNode::And(cs) => CNode::And(cs.clone()),
                NnfNode::Or { children, .. } => CNode::Or(children.clone()),
            })
            .collect();
        let circuit = Circuit::build(nodes, dag.root(), var_atom);
        Ok(CountingGraph { dag, circuit })
    }

    pub fn dag(&self) -> &NnfDag {
        &self.dag
    }

    pub fn size_report(&self) -> SizeReport {
        self.circuit.size()
    }

    /// `val(G^L)`; 0 for inconsistent assumptions.
    pub fn evaluate(&self, assumptions: &AssumptionSet) -> Result<BigUint, CountingError> {
        Ok(self.evaluate_instrumented(assumptions)?.0)
    }

    pub fn evaluate_instrumented(&self, assumptions: &AssumptionSet) -> Result<(BigUint, usize), CountingError> {
        let lits: Vec<Lit> = assumptions.iter().collect();
        match self.circuit.condition(&lits)? {
            None => Ok((BigUint::zero(), 0)),
            Some(c) => Ok(self.circuit.eval(&c)),
        }
    }
}

/// The compressed counting graph `τ(G)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedGraph {
    circuit: Circuit,
    /// Original node id of every retained node.
    provenance: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionStats {
    pub original: SizeReport,
    pub compressed: SizeReport,
    /// Full traversals of the original graph.
    pub traversals: usize,
    pub nodes_visited: usize,
    pub ignored: usize,
    pub absorbed: usize,
}

#[derive(Clone, Copy)]
enum Mark {
    Keep,
    Ignored,
    Absorbed(u32),
}

/// Algorithm 1: auxiliary literals are ignored; internal nodes keep their
/// non-ignored children, are ignored with none left and absorbed into the
/// single child with one left. Ignored children are thus neutral: 1 in a
/// product, 0 in a sum. Constants are kept.
pub fn compress(g: &CountingGraph) -> (CompressedGraph, CompressionStats) {
    let c = &g.circuit;
    let n = c.nodes.len();
    let mut marks = vec![Mark::Keep; n];
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut stats = CompressionStats { original: c.size(), ..Default::default() };

    // Pass 1: bottom-up marking; absorbed nodes point at their final
    // representative.
    for (i, node) in c.nodes.iter().enumerate() {
        stats.nodes_visited += 1;
        marks[i] = match node {
            CNode::Lit(l) if c.var_atom[l.unsigned_abs() as usize - 1].is_none() => Mark::Ignored,
            CNode::Lit(_) | CNode::Const(_) => Mark::Keep,
            CNode::And(cs) | CNode::Or(cs) => {
                let remaining: Vec<u32> = cs
                    .iter()
                    .filter_map(|&ch| match marks[ch as usize] {
                        Mark::Ignored => None,
                        Mark::Absorbed(r) => Some(r),
                        Mark::Keep => Some(ch),
                    })
                    .collect();
                match remaining.len() {
                    0 => Mark::Ignored,
                    1 => Mark::Absorbed(remaining[0]),
                    _ => {
                        children[i] = remaining;
                        Mark::Keep
                    }
                }
            }
        };
        match marks[i] {
            Mark::Ignored => stats.ignored += 1,
            Mark::Absorbed(_) => stats.absorbed += 1,
            Mark::Keep => {}
        }
    }
    stats.traversals += 1;

    // Pass 2: drop ignored and absorbed nodes, renumbering the rest.
    let mut remap = vec![u32::MAX; n];
    let mut nodes = Vec::new();
    let mut provenance = Vec::new();
    for (i, node) in c.nodes.iter().enumerate() {
        stats.nodes_visited += 1;
        if !matches!(marks[i], Mark::Keep) {
            continue;
        }
        remap[i] = nodes.len() as u32;
        provenance.push(i as u32);
        let map = |cs: &[u32]| cs.iter().map(|&ch| remap[ch as usize]).collect::<Vec<_>>();
        nodes.push(match node {
            CNode::Lit(l) => CNode::Lit(*l),
            CNode::Const(b) => CNode::Const(*b),
            CNode::And(_) => CNode::And(map(&children[i])),
            CNode::Or(_) => CNode::Or(map(&children[i])),
        });
    }
    stats.traversals += 1;

    let root = match marks[c.root as usize] {
        Mark::Keep => remap[c.root as usize],
        Mark::Absorbed(r) => remap[r as usize],
        Mark::Ignored => {
            provenance.push(c.root);
            nodes.push(CNode::Const(true));
            nodes.len() as u32 - 1
        }
    };
    let circuit = Circuit::build(nodes, root, c.var_atom.clone());
    stats.compressed = circuit.size();
    (CompressedGraph { circuit, provenance }, stats)
}

impl CompressedGraph {
    pub fn size_report(&self) -> SizeReport {
        self.circuit.size()
    }

    pub fn provenance(&self) -> &[u32] {
        &self.provenance
    }

    pub fn nodes(&self) -> &[CNode] {
        &self.circuit.nodes
    }

    pub fn root(&self) -> u32 {
        self.circuit.root
    }

    /// Number of program atoms the graph can be conditioned on.
    pub fn atom_count(&self) -> usize {
        self.circuit.atom_var.len()
    }

    /// Whether `atom` has a variable in the graph.
    pub fn knows(&self, atom: Atom) -> bool {
        self.circuit.atom_var.get(atom.index()).copied().flatten().is_some()
    }

    pub fn evaluate(&self, assumptions: &AssumptionSet) -> Result<BigUint, CountingError> {
        Ok(self.evaluate_instrumented(assumptions)?.0)
    }

    pub fn evaluate_instrumented(&self, assumptions: &AssumptionSet) -> Result<(BigUint, usize), CountingError> {
        let lits: Vec<Lit> = assumptions.iter().collect();
        self.evaluate_lits(&lits).map(|r| r.unwrap_or((BigUint::zero(), 0)))
    }

    /// `None` when the literals contradict each other.
    pub fn evaluate_lits(&self, lits: &[Lit]) -> Result<Option<(BigUint, usize)>, CountingError> {
        Ok(self.circuit.condition(lits)?.map(|c| self.circuit.eval(&c)))
    }

    /// Writes the `.ccg` binary form.
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        let c = &self.circuit;
        w.write_all(CCG_MAGIC)?;
        w.write_u32::<LittleEndian>(c.var_atom.len() as u32)?;
        for a in &c.var_atom {
            w.write_u32::<LittleEndian>(a.map_or(0, |a| a.0 + 1))?;
        }
        let size = c.size();
        w.write_u32::<LittleEndian>(size.node_count as u32)?;
        w.write_u64::<LittleEndian>(size.edge_count as u64)?;
        w.write_u32::<LittleEndian>(c.root)?;
        for (node, &prov) in c.nodes.iter().zip(&self.provenance) {
            match node {
                CNode::Lit(l) => {
                    w.write_u8(0)?;
                    w.write_i32::<LittleEndian>(*l)?;
                }
                CNode::And(cs) | CNode::Or(cs) => {
                    w.write_u8(if matches!(node, CNode::And(_)) { 1 } else { 2 })?;
                    w.write_u32::<LittleEndian>(cs.len() as u32)?;
                    for &ch in cs {
                        w.write_u32::<LittleEndian>(ch)?;
                    }
                }
                CNode::Const(b) => w.write_u8(if *b { 3 } else { 4 })?,
            }
            w.write_u32::<LittleEndian>(prov)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, CountingError> {
        let bad = |m: &str| CountingError::Format(m.to_owned());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CCG_MAGIC {
            return Err(bad("bad magic"));
        }
        let num_vars = r.read_u32::<LittleEndian>()?;
        let mut var_atom = Vec::with_capacity(num_vars as usize);
        for _ in 0..num_vars {
            let a = r.read_u32::<LittleEndian>()?;
            var_atom.push(a.checked_sub(1).map(Atom));
        }
        let count = r.read_u32::<LittleEndian>()?;
        let edges = r.read_u64::<LittleEndian>()?;
        let root = r.read_u32::<LittleEndian>()?;
        if root >= count {
            return Err(bad("root out of range"));
        }
        let mut nodes = Vec::with_capacity(count as usize);
        let mut provenance = Vec::with_capacity(count as usize);
        for id in 0..count {
            let tag = r.read_u8()?;
            let node = match tag {
                0 => {
                    let l = r.read_i32::<LittleEndian>()?;
                    if l == 0 || l.unsigned_abs() > num_vars {
                        return Err(bad("literal out of range"));
                    }
                    CNode::Lit(l)
                }
                1 | 2 => {
                    let k = r.read_u32::<LittleEndian>()?;
                    let mut cs = Vec::with_capacity(k.min(1 << 16) as usize);
                    for _ in 0..k {
                        let ch = r.read_u32::<LittleEndian>()?;
                        if ch >= id {
                            return Err(bad("child does not precede its parent"));
                        }
                        cs.push(ch);
                    }
                    if tag == 1 {
                        CNode::And(cs)
                    } else {
                        CNode::Or(cs)
                    }
                }
                3 => CNode::Const(true),
                4 => CNode::Const(false),
                _ => return Err(bad("unknown node tag")),
            };
            nodes.push(node);
            provenance.push(r.read_u32::<LittleEndian>()?);
        }
        let circuit = Circuit::build(nodes, root, var_atom);
        if circuit.size().edge_count as u64 != edges {
            return Err(bad("edge count mismatch"));
        }
        Ok(CompressedGraph { circuit, provenance })
    }
}

const CCG_MAGIC: &[u8; 4] = b"CCG1";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::{build_completion, parse_dimacs};
    use crate::lp::{parse_assumptions, parse_program, Program};
    use crate::nnf::{compile, parse_nnf, CompileOptions, FIGURE1_NNF};
    use crate::oracle::{count_under, Semantics};
    use crate::samples::*;
    use rand::{Rng, SeedableRng};

    /// Fig. 1 with a, b, c as program atoms and x1, x2, x3, x5 auxiliary.
    fn figure1() -> (Program, CountingGraph) {
        let p = parse_program("a :- b.\nb.\nc :- c.\n").unwrap();
        let mut cnf = parse_dimacs("p cnf 7 0\n").unwrap();
        for v in 3..7 {
            cnf.var_kind[v] = VarKind::Aux;
        }
        (p, CountingGraph::new(parse_nnf(FIGURE1_NNF).unwrap(), &cnf).unwrap())
    }

    fn graph(p: &Program) -> CountingGraph {
        let cnf = build_completion(p);
        let (dag, _) = compile(&cnf, &CompileOptions::default()).unwrap();
        CountingGraph::new(dag, &cnf).unwrap()
    }

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn figure1_values() {
        let (p, g) = figure1();
        assert_eq!(g.size_report(), SizeReport { node_count: 14, edge_count: 13 });
        assert_eq!(g.evaluate(&AssumptionSet::new()).unwrap(), n(2));
        assert_eq!(g.evaluate(&parse_assumptions(&p, "-c").unwrap()).unwrap(), n(1));
        assert_eq!(g.evaluate(&parse_assumptions(&p, "c,-c").unwrap()).unwrap(), n(0));
    }

    #[test]
    fn figure1_compression() {
        let (p, g) = figure1();
        let (t, stats) = compress(&g);
        assert_eq!(stats.traversals, 2);
        assert_eq!(stats.nodes_visited, 28);
        assert_eq!(t.size_report(), SizeReport { node_count: 7, edge_count: 6 });
        assert!(t.nodes().iter().all(|n| !matches!(n, CNode::Lit(l) if l.unsigned_abs() > 3)));
        assert!(t.nodes().iter().all(|n| n.children().is_empty() || n.children().len() >= 2));
        assert_eq!(t.evaluate(&AssumptionSet::new()).unwrap(), n(2));
        assert_eq!(t.evaluate(&parse_assumptions(&p, "-c").unwrap()).unwrap(), n(1));
        assert_eq!(t.evaluate(&parse_assumptions(&p, "c").unwrap()).unwrap(), n(1));
        assert_eq!(t.evaluate(&parse_assumptions(&p, "-a").unwrap()).unwrap(), n(0));
    }

    #[test]
    fn no_auxiliaries_keeps_structure() {
        let p = parse_program("a :- not b.\nb :- not a.\n").unwrap();
        let g = graph(&p);
        let (t, stats) = compress(&g);
        assert_eq!(stats.ignored + stats.absorbed, 0);
        assert_eq!(t.size_report(), g.size_report());
        assert_eq!(t.provenance(), (0..g.size_report().node_count as u32).collect::<Vec<_>>());
    }

    #[test]
    fn inconsistent_assumptions_count_zero() {
        let p = parse_program(PI2).unwrap();
        let (t, _) = compress(&graph(&p));
        assert_eq!(t.evaluate(&parse_assumptions(&p, "a,-a").unwrap()).unwrap(), n(0));
        assert_eq!(t.evaluate(&AssumptionSet::new()).unwrap(), n(3));
    }

    #[test]
    fn conditioning_matches_oracle() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for text in [PI1, PI2, PI3, PI4] {
            let p = parse_program(text).unwrap();
            let g = graph(&p);
            let (t, _) = compress(&g);
            for _ in 0..50 {
                let mut l = AssumptionSet::new();
                for a in p.atoms() {
                    match rng.gen_range(0..4) {
                        0 => l.insert(Lit::pos(a)),
                        1 => l.insert(Lit::neg(a)),
                        _ => false,
                    };
                }
                let expect = n(count_under(&p, &l, Semantics::Supported).unwrap());
                let (v, visited) = g.evaluate_instrumented(&l).unwrap();
                assert_eq!(v, expect);
                assert_eq!(visited, g.size_report().node_count);
                assert_eq!(t.evaluate(&l).unwrap(), expect);
            }
        }
    }

    #[test]
    fn refuses_non_smooth() {
        let dag = parse_nnf("nnf 4 4 2\nL 1\nL 2\nA 2 0 1\nO 0 2 2 0\n").unwrap();
        let cnf = parse_dimacs("p cnf 2 0\n").unwrap();
        assert!(matches!(CountingGraph::new(dag, &cnf), Err(CountingError::NotSdDnnf(_))));
    }

    #[test]
    fn unknown_atom() {
        let p = parse_program(PI1).unwrap();
        let (t, _) = compress(&graph(&p));
        let mut l = AssumptionSet::new();
        l.insert(Lit::pos(Atom(40)));
        assert!(matches!(t.evaluate(&l), Err(CountingError::UnknownAtom(40))));
    }

    #[test]
    fn big_counts() {
        // 140 unconstrained choices: 2^140 supported models.
        let text: String = (0..140).map(|i| format!("p{i} :- not q{i}.\nq{i} :- not p{i}.\n")).collect();
        let p = parse_program(&text).unwrap();
        let (t, _) = compress(&graph(&p));
        assert_eq!(t.evaluate(&AssumptionSet::new()).unwrap(), BigUint::one() << 140);
        let l = parse_assumptions(&p, "p0,q1").unwrap();
        assert_eq!(t.evaluate(&l).unwrap(), BigUint::one() << 138);
    }

    #[test]
    fn ccg_round_trip() {
        let p = parse_program(PI4).unwrap();
        let (t, _) = compress(&graph(&p));
        let bytes = t.to_bytes();
        let back = CompressedGraph::read_from(&bytes[..]).unwrap();
        assert_eq!(back, t);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(CompressedGraph::read_from(&bad[..]).is_err());
        assert!(CompressedGraph::read_from(&bytes[..bytes.len() - 3]).is_err());
    }
}
