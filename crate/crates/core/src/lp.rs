//! Ground normal logic programs: atoms, rules, assumptions and the `.lp`
//! subset parser.
//!
//! Accepted syntax, one statement per `.`:
//!
//! ```text
//! % comment
//! a :- b, not c.
//! b.
//! :- a, not b.
//! ```

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense atom index, contiguous `0..n` within a [`Program`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom(pub u32);

impl Atom {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Signed atom reference.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit {
    pub atom: Atom,
    pub positive: bool,
}

impl Lit {
    pub fn pos(atom: Atom) -> Self {
        Lit { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Lit { atom, positive: false }
    }

    pub fn negate(self) -> Self {
        Lit { atom: self.atom, positive: !self.positive }
    }

    /// DIMACS-style signed integer, atom `i` maps to variable `i + 1`.
    pub fn to_dimacs(self) -> i32 {
        let v = self.atom.0 as i32 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

/// `head :- pos_body, not neg_body.`; a missing head is a constraint.
///
/// Bodies are kept sorted and deduplicated. A rule whose positive and
/// negative bodies intersect is kept as written; it can never fire.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub head: Option<Atom>,
    pub pos_body: Vec<Atom>,
    pub neg_body: Vec<Atom>,
}

impl Rule {
    pub fn new(head: Option<Atom>, mut pos_body: Vec<Atom>, mut neg_body: Vec<Atom>) -> Self {
        pos_body.sort_unstable();
        pos_body.dedup();
        neg_body.sort_unstable();
        neg_body.dedup();
        Rule { head, pos_body, neg_body }
    }

    pub fn fact(head: Atom) -> Self {
        Rule::new(Some(head), Vec::new(), Vec::new())
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn body_len(&self) -> usize {
        self.pos_body.len() + self.neg_body.len()
    }

    /// Body literals, positive ones first.
    pub fn body_lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.pos_body.iter().map(|&a| Lit::pos(a)).chain(self.neg_body.iter().map(|&a| Lit::neg(a)))
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.head.iter().copied().chain(self.pos_body.iter().copied()).chain(self.neg_body.iter().copied())
    }

    /// True when the body contains some `p` and `not p`.
    pub fn never_applicable(&self) -> bool {
        self.pos_body.iter().any(|a| self.neg_body.binary_search(a).is_ok())
    }
}

/// A finite set of ground normal rules over an interned atom table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    atoms: IndexSet<String>,
    rules: Vec<Rule>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the atom for `name`, creating it if needed.
    pub fn intern(&mut self, name: &str) -> Atom {
        if let Some(i) = self.atoms.get_index_of(name) {
            return Atom(i as u32);
        }
        let (i, _) = self.atoms.insert_full(name.to_owned());
        Atom(i as u32)
    }

    /// Appends a rule. Every atom of the rule must already be interned.
    pub fn add_rule(&mut self, rule: Rule) {
        assert!(rule.atoms().all(|a| a.index() < self.atoms.len()), "rule references an atom outside the table");
        self.rules.push(rule);
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> {
        (0..self.atoms.len() as u32).map(Atom)
    }

    pub fn name(&self, atom: Atom) -> &str {
        &self.atoms[atom.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<Atom> {
        self.atoms.get_index_of(name).map(|i| Atom(i as u32))
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Rules whose head is `atom`, in program order.
    pub fn defining_rules(&self, atom: Atom) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.head == Some(atom))
    }

    /// Same atom table, no rules.
    pub fn clone_atoms(&self) -> Program {
        Program { atoms: self.atoms.clone(), rules: Vec::new() }
    }

    pub fn format_lit(&self, lit: Lit) -> String {
        if lit.positive {
            self.name(lit.atom).to_owned()
        } else {
            format!("-{}", self.name(lit.atom))
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.rules {
            if let Some(h) = rule.head {
                f.write_str(self.name(h))?;
                if rule.body_len() > 0 {
                    f.write_str(" :- ")?;
                }
            } else {
                f.write_str(":- ")?;
            }
            let mut first = true;
            for lit in rule.body_lits() {
                if !first {
                    f.write_str(", ")?;
                }
                first = false;
                if !lit.positive {
                    f.write_str("not ")?;
                }
                f.write_str(self.name(lit.atom))?;
            }
            writeln!(f, ".")?;
        }
        Ok(())
    }
}

/// Both polarities of every atom.
pub fn literals_of(program: &Program) -> BTreeSet<Lit> {
    program.atoms().flat_map(|a| [Lit::pos(a), Lit::neg(a)]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    If,
    Comma,
    Dot,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "atom `{s}`"),
            Token::Not => f.write_str("`not`"),
            Token::If => f.write_str("`:-`"),
            Token::Comma => f.write_str("`,`"),
            Token::Dot => f.write_str("`.`"),
        }
    }
}

struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let err = |message: String| ParseError { line: lineno + 1, column: i + 1, message };
            let push = |out: &mut Vec<Spanned>, token| out.push(Spanned { token, line: lineno + 1, column: i + 1 });
            match c {
                '%' => break,
                c if c.is_whitespace() => i += 1,
                ',' => {
                    push(&mut out, Token::Comma);
                    i += 1;
                }
                '.' => {
                    push(&mut out, Token::Dot);
                    i += 1;
                }
                ':' => {
                    if chars.get(i + 1) == Some(&'-') {
                        push(&mut out, Token::If);
                        i += 2;
                    } else {
                        return Err(err("expected `:-`".into()));
                    }
                }
                'a'..='z' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    let token = if word == "not" { Token::Not } else { Token::Ident(word) };
                    out.push(Spanned { token, line: lineno + 1, column: start + 1 });
                }
                'A'..='Z' | '_' => return Err(err("variables are not supported; the program must be ground".into())),
                other => return Err(err(format!("unexpected character `{other}`"))),
            }
        }
    }
    Ok(out)
}

struct Parser<'t> {
    tokens: &'t [Spanned],
    pos: usize,
    eof: (usize, usize),
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Spanned> {
        self.tokens.get(self.pos)
    }

    fn error_here(&self, message: String) -> ParseError {
        let (line, column) = match self.peek() {
            Some(t) => (t.line, t.column),
            None => self.eof,
        };
        ParseError { line, column, message }
    }

    fn next(&mut self) -> Option<&'t Spanned> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn expect_ident(&mut self) -> Result<&'t str, ParseError> {
        match self.peek() {
            Some(Spanned { token: Token::Ident(name), .. }) => {
                self.pos += 1;
                Ok(name)
            }
            Some(t) => Err(self.error_here(format!("expected an atom, found {}", t.token))),
            None => Err(self.error_here("expected an atom, found end of input".into())),
        }
    }

    fn body(&mut self, program: &mut Program) -> Result<(Vec<Atom>, Vec<Atom>), ParseError> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        loop {
            let negated = matches!(self.peek(), Some(Spanned { token: Token::Not, .. }));
            if negated {
                self.pos += 1;
            }
            let atom = program.intern(self.expect_ident()?);
            if negated {
                neg.push(atom);
            } else {
                pos.push(atom);
            }
            match self.next() {
                Some(Spanned { token: Token::Comma, .. }) => continue,
                Some(Spanned { token: Token::Dot, .. }) => return Ok((pos, neg)),
                Some(t) => {
                    self.pos -= 1;
                    return Err(self.error_here(format!("expected `,` or `.`, found {}", t.token)));
                }
                None => return Err(self.error_here("missing `.` at end of rule".into())),
            }
        }
    }
}

/// Parses the ground `.lp` subset. Atoms are numbered by first textual
/// occurrence; facts become rules with empty bodies and `:- body.` a rule
/// with no head.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(text)?;
    let last_line = text.lines().count().max(1);
    let last_col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    let mut parser = Parser { tokens: &tokens, pos: 0, eof: (last_line, last_col) };
    let mut program = Program::new();

    while let Some(tok) = parser.peek() {
        match &tok.token {
            Token::If => {
                parser.pos += 1;
                let (pos, neg) = parser.body(&mut program)?;
                program.add_rule(Rule::new(None, pos, neg));
            }
            Token::Ident(_) => {
                let head = program.intern(parser.expect_ident()?);
                match parser.next() {
                    Some(Spanned { token: Token::Dot, .. }) => program.add_rule(Rule::fact(head)),
                    Some(Spanned { token: Token::If, .. }) => {
                        let (pos, neg) = parser.body(&mut program)?;
                        program.add_rule(Rule::new(Some(head), pos, neg));
                    }
                    Some(t) => {
                        parser.pos -= 1;
                        return Err(parser.error_here(format!("expected `:-` or `.`, found {}", t.token)));
                    }
                    None => return Err(parser.error_here("missing `.` at end of rule".into())),
                }
            }
            other => return Err(parser.error_here(format!("unexpected {other} at start of rule"))),
        }
    }
    Ok(program)
}

/// A set of signed atoms. Consistency is a property checked on demand;
/// counting treats an inconsistent set as having no models.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssumptionSet {
    lits: BTreeSet<Lit>,
}

impl AssumptionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, lit: Lit) -> bool {
        self.lits.insert(lit)
    }

    pub fn remove(&mut self, lit: &Lit) -> bool {
        self.lits.remove(lit)
    }

    pub fn contains(&self, lit: &Lit) -> bool {
        self.lits.contains(lit)
    }

    pub fn mentions(&self, atom: Atom) -> bool {
        self.lits.contains(&Lit::pos(atom)) || self.lits.contains(&Lit::neg(atom))
    }

    pub fn is_consistent(&self) -> bool {
        check_consistent(self)
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Lit> + '_ {
        self.lits.iter().copied()
    }

    pub fn union(&self, other: &AssumptionSet) -> AssumptionSet {
        AssumptionSet { lits: self.lits.union(&other.lits).copied().collect() }
    }

    /// Comma separated, `-` marks negative literals.
    pub fn format(&self, program: &Program) -> String {
        self.lits.iter().map(|&l| program.format_lit(l)).collect::<Vec<_>>().join(",")
    }
}

impl FromIterator<Lit> for AssumptionSet {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
        AssumptionSet { lits: iter.into_iter().collect() }
    }
}

impl Extend<Lit> for AssumptionSet {
    fn extend<I: IntoIterator<Item = Lit>>(&mut self, iter: I) {
        self.lits.extend(iter)
    }
}

/// True iff no atom occurs with both signs.
pub fn check_consistent(assumptions: &AssumptionSet) -> bool {
    // BTreeSet orders by (atom, sign) so complementary literals are adjacent.
    let mut prev: Option<Lit> = None;
    for &lit in &assumptions.lits {
        if let Some(p) = prev {
            if p.atom == lit.atom {
                return false;
            }
        }
        prev = Some(lit);
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssumptionError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("empty literal in assumption list")]
    Empty,
}

/// Parses one literal: `a` or `-a` (`not a` is accepted as well).
pub fn parse_literal(program: &Program, text: &str) -> Result<Lit, AssumptionError> {
    let text = text.trim();
    let (positive, name) = if let Some(rest) = text.strip_prefix('-') {
        (false, rest.trim())
    } else if let Some(rest) = text.strip_prefix("not ") {
        (false, rest.trim())
    } else {
        (true, text)
    };
    if name.is_empty() {
        return Err(AssumptionError::Empty);
    }
    let atom = program.lookup(name).ok_or_else(|| AssumptionError::UnknownAtom(name.to_owned()))?;
    Ok(Lit { atom, positive })
}

/// Parses a comma separated list such as `a,-b,c`. An empty string is the
/// empty set.
pub fn parse_assumptions(program: &Program, text: &str) -> Result<AssumptionSet, AssumptionError> {
    if text.trim().is_empty() {
        return Ok(AssumptionSet::new());
    }
    text.split(',').map(|part| parse_literal(program, part)).collect()
}
