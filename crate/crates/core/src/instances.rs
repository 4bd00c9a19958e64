//! Generators for benchmark programs.

use std::fmt::Write as _;

/// Ground n-queens: one guessed `q_i_j` per cell, a queen in every row, no
/// two queens attacking. Tight, so supported models and answer sets
/// coincide (92 for `n = 8`).
pub fn n_queens(n: usize) -> String {
    let mut out = String::new();
    for i in 1..=n {
        for j in 1..=n {
            writeln!(out, "q_{i}_{j} :- not nq_{i}_{j}.").unwrap();
            writeln!(out, "nq_{i}_{j} :- not q_{i}_{j}.").unwrap();
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            writeln!(out, "row_{i} :- q_{i}_{j}.").unwrap();
        }
        writeln!(out, ":- not row_{i}.").unwrap();
    }
    let cells: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    for (x, &(i, j)) in cells.iter().enumerate() {
        for &(k, l) in &cells[x + 1..] {
            let attacks = i == k || j == l || i.abs_diff(k) == j.abs_diff(l);
            if attacks {
                writeln!(out, ":- q_{i}_{j}, q_{k}_{l}.").unwrap();
            }
        }
    }
    out
}
