//! Small programs used throughout the docs and tests.

/// Non-tight because of `c :- c`: supported models `{a,b}` and `{a,b,c}`,
/// one answer set `{a,b}`.
pub const PI1: &str = "a :- b.\nb.\nc :- c.\n";

/// The cycle `{a,b}` is supported from outside only through `c`.
pub const PI2: &str = "a :- b.\nb :- a.\na :- c.\nc :- not d.\nd :- not c.\n";

/// `PI2` plus a second cycle `{e,f}`; six supported models, two answer sets.
pub const PI3: &str = "a :- b.\nb :- a.\na :- c.\nc :- not d.\nd :- not c.\n\
b :- g.\nf :- g.\ne :- f.\nf :- e.\n";

/// Four atoms `a,b,c,d` wired into overlapping two-cycles.
pub const PI4: &str = "a :- b.\nb :- a.\nb :- c.\nc :- b.\n\
a :- d.\nd :- a.\nc :- d.\nd :- c.\n\
a :- g.\nb :- not h.\nc :- f.\nd :- not e.\n\
e :- not g.\ng :- not e.\nf :- not h.\nh :- not f.\n";

/// Supported models of [`PI4`].
pub const PI4_SUPPORTED: &[&[&str]] = &[
    &["e", "h"],
    &["a", "b", "c", "d", "g", "h"],
    &["a", "b", "c", "d", "f", "g"],
    &["a", "b", "c", "d", "e", "h"],
    &["a", "b", "c", "d", "e", "f"],
];
