mod common;

use std::collections::BTreeSet;

use asnav_core::artifact::{build, BuildOptions, CompiledArtifact};
use asnav_core::completion::{apply_assumptions, brute_force_count, CnfDoc};
use asnav_core::counting::{compress, CountingGraph};
use asnav_core::depgraph::{build_depgraph, enumerate_cycles, normalize_supports, CycleMode};
use asnav_core::inclexcl::RefineOptions;
use asnav_core::lp::{parse_program, AssumptionSet, Atom, Lit};
use asnav_core::nnf::{brute_force_models, compile, parse_nnf, smooth, CompileOptions, NnfDag, NnfNode, NodeId};
use asnav_core::oracle::{count_under, Semantics};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn program(seed: u64) -> String {
    common::random_program(&mut StdRng::seed_from_u64(seed), 10, 20).0
}

fn random_cnf(rng: &mut StdRng, max_vars: u32, max_clauses: usize) -> CnfDoc {
    let n = rng.gen_range(1..=max_vars);
    let clauses = (0..rng.gen_range(0..=max_clauses))
        .map(|_| {
            (0..rng.gen_range(1..=3))
                .map(|_| {
                    let v = rng.gen_range(1..=n as i32);
                    if rng.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    CnfDoc::from_clauses(n, clauses)
}

fn compiled(cnf: &CnfDoc) -> NnfDag {
    compile(cnf, &CompileOptions::default()).unwrap().0
}

/// A decision-DNNF that is usually not smooth: branches drop variables at
/// random.
fn random_ddnnf(rng: &mut StdRng, num_vars: u32) -> NnfDag {
    fn go(rng: &mut StdRng, nodes: &mut Vec<NnfNode>, vars: &[u32]) -> NodeId {
        let mut push = |n: NnfNode| {
            nodes.push(n);
            (nodes.len() - 1) as NodeId
        };
        if vars.is_empty() || rng.gen_bool(0.2) {
            return match (vars.choose(rng), rng.gen_range(0..4)) {
                (Some(&v), 0) => push(NnfNode::Lit(v as i32)),
                (Some(&v), 1) => push(NnfNode::Lit(-(v as i32))),
                (_, 2) => push(NnfNode::falsity()),
                _ => push(NnfNode::truth()),
            };
        }
        if vars.len() > 1 && rng.gen_bool(0.4) {
            let cut = rng.gen_range(1..vars.len());
            let l = go(rng, nodes, &vars[..cut]);
            let r = go(rng, nodes, &vars[cut..]);
            nodes.push(NnfNode::And(vec![l, r]));
            return (nodes.len() - 1) as NodeId;
        }
        let v = vars[0];
        let mut children = Vec::new();
        for sign in [1, -1] {
            let rest: Vec<u32> = vars[1..].iter().copied().filter(|_| rng.gen_bool(0.8)).collect();
            let sub = go(rng, nodes, &rest);
            nodes.push(NnfNode::Lit(sign * v as i32));
            let lit = (nodes.len() - 1) as NodeId;
            nodes.push(NnfNode::And(vec![lit, sub]));
            children.push((nodes.len() - 1) as NodeId);
        }
        nodes.push(NnfNode::Or { decision: v, children });
        (nodes.len() - 1) as NodeId
    }
    let mut vars: Vec<u32> = (1..=num_vars).collect();
    vars.shuffle(rng);
    let mut nodes = Vec::new();
    let root = go(rng, &mut nodes, &vars);
    NnfDag::new(nodes, root, num_vars)
}

/// Vertex sets of closed walks, by reachability inside each subset.
fn closed_walk_sets(n: usize, edges: &[(usize, usize)]) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for mask in 1u32..1 << n {
        let members: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let inside = |&(u, v): &&(usize, usize)| mask >> u & 1 == 1 && mask >> v & 1 == 1;
        let induced: Vec<&(usize, usize)> = edges.iter().filter(inside).collect();
        if induced.is_empty() {
            continue;
        }
        let reach = |from: usize, forward: bool| {
            let mut seen = 1u32 << from;
            let mut queue = vec![from];
            while let Some(x) = queue.pop() {
                for &&(u, v) in &induced {
                    let (a, b) = if forward { (u, v) } else { (v, u) };
                    if a == x && seen >> b & 1 == 0 {
                        seen |= 1 << b;
                        queue.push(b);
                    }
                }
            }
            seen
        };
        if reach(members[0], true) == mask && reach(members[0], false) == mask {
            out.insert(members);
        }
    }
    out
}

fn graph_program(n: usize, edges: &[(usize, usize)]) -> String {
    let mut text: String = (0..n).map(|v| format!("v{v} :- not v{v}.\n")).collect();
    for &(u, v) in edges {
        text.push_str(&format!("v{v} :- v{u}.\n"));
    }
    text
}

fn atom_sets(p: &asnav_core::Program, cycles: &[Vec<Atom>]) -> BTreeSet<Vec<usize>> {
    cycles
        .iter()
        .map(|c| {
            let mut v: Vec<usize> = c.iter().map(|&a| p.name(a)[1..].parse().unwrap()).collect();
            v.sort();
            v
        })
        .collect()
}

fn count_all(a: &CompiledArtifact, sets: &[AssumptionSet]) -> Vec<(String, String)> {
    sets.iter()
        .map(|l| {
            let t = a.count(l, &RefineOptions::full()).unwrap();
            (t.count.to_string(), t.bound.to_string())
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normalization_preserves_supported_models(seed in any::<u64>()) {
        let p = parse_program(&program(seed)).unwrap();
        let (q, norm) = normalize_supports(&p);
        prop_assert_eq!(q.atom_count(), p.atom_count() + norm.added_atoms.len());
        let empty = AssumptionSet::new();
        prop_assert_eq!(
            count_under(&p, &empty, Semantics::Supported).unwrap(),
            count_under(&q, &empty, Semantics::Supported).unwrap()
        );
        prop_assert_eq!(
            count_under(&p, &empty, Semantics::Answer).unwrap(),
            count_under(&q, &empty, Semantics::Answer).unwrap()
        );
    }

    #[test]
    fn cycle_modes_match_walk_oracle(
        n in 1usize..=7,
        raw in proptest::collection::vec((0usize..7, 0usize..7), 0..14),
    ) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(u, v)| (u % n, v % n)).collect();
        let p = parse_program(&graph_program(n, &edges)).unwrap();
        let g = build_depgraph(&p);
        let simple = atom_sets(&p, &enumerate_cycles(&g, CycleMode::Simple, 1 << 20).unwrap());
        let exhaustive = atom_sets(&p, &enumerate_cycles(&g, CycleMode::Exhaustive, 1 << 20).unwrap());
        prop_assert!(simple.is_subset(&exhaustive));
        prop_assert_eq!(exhaustive, closed_walk_sets(n, &edges));
    }

    #[test]
    fn nnf_text_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dag = compiled(&random_cnf(&mut rng, 10, 20));
        let text = dag.to_text();
        let back = parse_nnf(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.model_count(), dag.model_count());
    }

    #[test]
    fn smoothing_preserves_models(seed in any::<u64>(), num_vars in 1u32..=8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dag = random_ddnnf(&mut rng, num_vars);
        let before = dag.validate();
        prop_assert!(before.decomposable && before.deterministic);
        let s = smooth(&dag);
        prop_assert!(s.validate().all() || s.is_false());
        prop_assert_eq!(s.graph_value(), BigUint::from(brute_force_models(&dag)));
        prop_assert_eq!(brute_force_models(&s), brute_force_models(&dag));
    }

    #[test]
    fn conditioning_counts_consistent_models(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cnf = random_cnf(&mut rng, 12, 24);
        let g = CountingGraph::new(compiled(&cnf), &cnf).unwrap();
        for _ in 0..8 {
            let l = common::random_assumptions(&mut rng, cnf.num_vars as usize, 4);
            let want = brute_force_count(&apply_assumptions(&cnf, &l).unwrap());
            prop_assert_eq!(g.evaluate(&l).unwrap(), BigUint::from(want));
        }
    }

    #[test]
    fn compression_preserves_conditioned_values(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let text = common::random_program_text(&mut rng, 12, 24);
        let p = parse_program(&text).unwrap();
        let cnf = asnav_core::completion::build_completion(&normalize_supports(&p).0);
        let g = CountingGraph::new(compiled(&cnf), &cnf).unwrap();
        let (tg, stats) = compress(&g);
        prop_assert!(stats.traversals <= 2);
        prop_assert!(tg.size_report().node_count <= g.size_report().node_count);
        for _ in 0..10 {
            let mut l = common::random_assumptions(&mut rng, p.atom_count(), 4);
            if rng.gen_bool(0.1) && p.atom_count() > 0 {
                l.insert(Lit::pos(Atom(0)));
                l.insert(Lit::neg(Atom(0)));
            }
            prop_assert_eq!(g.evaluate(&l).unwrap(), tg.evaluate(&l).unwrap());
        }
    }

    #[test]
    fn saved_artifacts_count_identically(seed in any::<u64>(), exhaustive in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let text = program(seed);
        let mode = if exhaustive { CycleMode::Exhaustive } else { CycleMode::Simple };
        let a = build(&text, &BuildOptions::with_cycles(mode)).unwrap();
        let b = CompiledArtifact::read_from(a.to_bytes().as_slice()).unwrap();
        let sets: Vec<AssumptionSet> =
            (0..6).map(|_| common::random_assumptions(&mut rng, a.visible_atoms, 3)).collect();
        prop_assert_eq!(count_all(&a, &sets), count_all(&b, &sets));
        prop_assert_eq!(b.catalog_text(), a.catalog_text());
        prop_assert_eq!(b.stats.supported_count, a.stats.supported_count);
    }
}

#[test]
fn corpus_round_trip_with_fifty_assumption_sets() {
    let mut rng = StdRng::seed_from_u64(0xc0ffee);
    for (name, text) in common::corpus(&mut rng) {
        for mode in [CycleMode::Simple, CycleMode::Exhaustive] {
            let Ok(a) = build(&text, &BuildOptions::with_cycles(mode)) else {
                continue;
            };
            let b = CompiledArtifact::read_from(a.to_bytes().as_slice()).unwrap();
            let sets: Vec<AssumptionSet> =
                (0..50).map(|_| common::random_assumptions(&mut rng, a.visible_atoms, 4)).collect();
            assert_eq!(count_all(&a, &sets), count_all(&b, &sets), "{name} {mode}");
        }
    }
}

#[test]
fn depth_zero_facets_split_supported_count() {
    let mut rng = StdRng::seed_from_u64(0xface7);
    for _ in 0..60 {
        let (text, _) = common::random_program(&mut rng, 10, 20);
        let p = parse_program(&text).unwrap();
        let a = build(&text, &BuildOptions::default()).unwrap();
        let l = common::random_assumptions(&mut rng, p.atom_count(), 2);
        let total = count_under(&p, &l, Semantics::Supported).unwrap();
        let report = a.facets(&l, &RefineOptions::depth(0)).unwrap();
        for f in &report.facets {
            let t: u64 = f.count_true.parse().unwrap();
            let e: u64 = f.count_false.parse().unwrap();
            assert_eq!(t + e, total, "{} in\n{text}", f.atom);
        }
    }
}
