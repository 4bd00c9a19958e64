#![allow(dead_code)]

use asnav_core::depgraph::{build_depgraph, enumerate_cycles, is_tight, CycleMode};
use asnav_core::instances::n_queens;
use asnav_core::lp::{parse_program, AssumptionSet, Atom, Lit, Program};
use asnav_core::samples::{PI1, PI2, PI3, PI4};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

/// Exhaustive catalogs above this size are resampled to keep full
/// inclusion-exclusion cheap.
pub const MAX_RANDOM_CYCLES: usize = 16;

/// A random ground normal program with at most `max_atoms` atoms and
/// `max_rules` rules. Positive bodies are drawn often enough that roughly
/// half the programs are non-tight.
pub fn random_program_text(rng: &mut StdRng, max_atoms: usize, max_rules: usize) -> String {
    let n = rng.gen_range(1..=max_atoms);
    let m = rng.gen_range(1..=max_rules);
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut out = String::new();
    for _ in 0..m {
        let head = if rng.gen_bool(0.1) { None } else { names.choose(rng) };
        let pos: Vec<&String> = (0..rng.gen_range(0..=2)).map(|_| names.choose(rng).unwrap()).collect();
        let neg: Vec<&String> = (0..rng.gen_range(0..=2)).map(|_| names.choose(rng).unwrap()).collect();
        let body: Vec<String> =
            pos.iter().map(|a| a.to_string()).chain(neg.iter().map(|a| format!("not {a}"))).collect();
        match (head, body.is_empty()) {
            (Some(h), true) => out.push_str(&format!("{h}.\n")),
            (Some(h), false) => out.push_str(&format!("{h} :- {}.\n", body.join(", "))),
            (None, true) => {}
            (None, false) => out.push_str(&format!(":- {}.\n", body.join(", "))),
        }
    }
    out
}

/// Draws programs until the exhaustive catalog is small; returns the text
/// and the number of resamples.
pub fn random_program(rng: &mut StdRng, max_atoms: usize, max_rules: usize) -> (String, usize) {
    let mut resamples = 0;
    loop {
        let text = random_program_text(rng, max_atoms, max_rules);
        let p = parse_program(&text).expect("generated programs parse");
        let g = build_depgraph(&p);
        if enumerate_cycles(&g, CycleMode::Exhaustive, MAX_RANDOM_CYCLES).is_ok() {
            return (text, resamples);
        }
        resamples += 1;
    }
}

pub fn is_tight_program(p: &Program) -> bool {
    is_tight(&build_depgraph(p))
}

/// Random consistent assumptions over the first `visible` atoms.
pub fn random_assumptions(rng: &mut StdRng, visible: usize, max_len: usize) -> AssumptionSet {
    let mut atoms: Vec<u32> = (0..visible as u32).collect();
    atoms.shuffle(rng);
    let k = rng.gen_range(0..=max_len.min(visible));
    atoms[..k].iter().map(|&a| if rng.gen_bool(0.5) { Lit::pos(Atom(a)) } else { Lit::neg(Atom(a)) }).collect()
}

/// Named programs used by the compression and NNF suites.
pub fn corpus(rng: &mut StdRng) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = vec![
        ("pi1".into(), PI1.into()),
        ("pi2".into(), PI2.into()),
        ("pi3".into(), PI3.into()),
        ("pi4".into(), PI4.into()),
    ];
    for n in [4, 5, 6, 8] {
        out.push((format!("queens{n}"), n_queens(n)));
    }
    out.push(("chain".into(), chained_cycles(6)));
    for i in 0..40 {
        let (text, _) = random_program(rng, 14, 28);
        out.push((format!("random{i}"), text));
    }
    out
}

/// `k` two-atom loops, each supported by a choice and by the previous
/// loop through a two-literal body.
pub fn chained_cycles(k: usize) -> String {
    let mut out = String::new();
    for i in 0..k {
        out.push_str(&format!("x{i} :- y{i}.\ny{i} :- x{i}.\n"));
        out.push_str(&format!("s{i} :- not t{i}.\nt{i} :- not s{i}.\n"));
        out.push_str(&format!("x{i} :- s{i}.\n"));
        if i > 0 {
            out.push_str(&format!("y{i} :- x{}, not t{i}.\n", i - 1));
        }
    }
    out
}
