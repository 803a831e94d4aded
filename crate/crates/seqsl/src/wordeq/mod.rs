//! Boolean combinations of word equations over a finite alphabet: the data
//! model, a ground evaluator, a brute-force oracle, a bounded-complete
//! solver ([`solve`]), and the single-equation transformation
//! ([`transform::to_single_equation`]).

mod solve;
mod transform;

pub use solve::{solve, SolveConfig};
pub use transform::{to_single_equation, to_single_equation_with_lift, Lifter, SingleEquation};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::SeqVar;
use crate::value::{Sequence, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordEqError {
    #[error("alphabet needs at least two letters, got {0}")]
    AlphabetTooSmall(usize),
    #[error("substitution is missing `@{0}`")]
    MissingVar(String),
    #[error("word formula parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{0}")]
    Unsupported(String),
}

/// One symbol of a word term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WordSym {
    Letter(Value),
    Var(SeqVar),
}

/// A flat concatenation of letters and variables.
pub type WordTerm = Vec<WordSym>;

pub fn letters(vs: &[Value]) -> WordTerm {
    vs.iter().map(|v| WordSym::Letter(*v)).collect()
}

pub fn var_term(name: &str) -> WordTerm {
    vec![WordSym::Var(SeqVar::new(name))]
}

/// A Boolean combination of word equations, with existential quantification
/// kept prenex by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordFormula {
    Eq(WordTerm, WordTerm),
    Not(Box<WordFormula>),
    And(Box<WordFormula>, Box<WordFormula>),
    Or(Box<WordFormula>, Box<WordFormula>),
    TrueF,
    FalseF,
    ExistsSeq(SeqVar, Box<WordFormula>),
}

impl WordFormula {
    /// Equation with constant folding: syntactically equal sides fold to
    /// true, distinct ground sides to false.
    pub fn eq(a: WordTerm, b: WordTerm) -> WordFormula {
        if a == b {
            return WordFormula::TrueF;
        }
        if let (Some(va), Some(vb)) = (ground_value(&a), ground_value(&b)) {
            return if va == vb { WordFormula::TrueF } else { WordFormula::FalseF };
        }
        WordFormula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: WordFormula) -> WordFormula {
        match f {
            WordFormula::TrueF => WordFormula::FalseF,
            WordFormula::FalseF => WordFormula::TrueF,
            other => WordFormula::Not(Box::new(other)),
        }
    }

    pub fn and(a: WordFormula, b: WordFormula) -> WordFormula {
        match (a, b) {
            (WordFormula::FalseF, _) | (_, WordFormula::FalseF) => WordFormula::FalseF,
            (WordFormula::TrueF, x) | (x, WordFormula::TrueF) => x,
            (a, b) => WordFormula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: WordFormula, b: WordFormula) -> WordFormula {
        match (a, b) {
            (WordFormula::TrueF, _) | (_, WordFormula::TrueF) => WordFormula::TrueF,
            (WordFormula::FalseF, x) | (x, WordFormula::FalseF) => x,
            (a, b) => WordFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn implies(a: WordFormula, b: WordFormula) -> WordFormula {
        WordFormula::or(WordFormula::not(a), b)
    }

    pub fn and_all<I: IntoIterator<Item = WordFormula>>(parts: I) -> WordFormula {
        parts.into_iter().fold(WordFormula::TrueF, WordFormula::and)
    }

    pub fn or_all<I: IntoIterator<Item = WordFormula>>(parts: I) -> WordFormula {
        parts.into_iter().fold(WordFormula::FalseF, WordFormula::or)
    }

    /// Every variable occurring, bound or free.
    pub fn vars(&self) -> BTreeSet<SeqVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<SeqVar>) {
        match self {
            WordFormula::Eq(a, b) => {
                for s in a.iter().chain(b) {
                    if let WordSym::Var(v) = s {
                        out.insert(v.clone());
                    }
                }
            }
            WordFormula::Not(a) => a.collect_vars(out),
            WordFormula::And(a, b) | WordFormula::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            WordFormula::ExistsSeq(v, a) => {
                out.insert(v.clone());
                a.collect_vars(out);
            }
            WordFormula::TrueF | WordFormula::FalseF => {}
        }
    }

    /// Letters occurring in the formula.
    pub fn letters(&self) -> BTreeSet<Value> {
        let mut out = BTreeSet::new();
        self.collect_letters(&mut out);
        out
    }

    fn collect_letters(&self, out: &mut BTreeSet<Value>) {
        match self {
            WordFormula::Eq(a, b) => {
                for s in a.iter().chain(b) {
                    if let WordSym::Letter(v) = s {
                        out.insert(*v);
                    }
                }
            }
            WordFormula::Not(a) => a.collect_letters(out),
            WordFormula::And(a, b) | WordFormula::Or(a, b) => {
                a.collect_letters(out);
                b.collect_letters(out);
            }
            WordFormula::ExistsSeq(_, a) => a.collect_letters(out),
            WordFormula::TrueF | WordFormula::FalseF => {}
        }
    }
}

fn ground_value(t: &WordTerm) -> Option<Sequence> {
    t.iter()
        .map(|s| match s {
            WordSym::Letter(v) => Some(*v),
            WordSym::Var(_) => None,
        })
        .collect()
}

pub fn term_of_values(t: &WordTerm, subst: &Substitution) -> Result<Sequence, WordEqError> {
    let mut out = Vec::new();
    for s in t {
        match s {
            WordSym::Letter(v) => out.push(*v),
            WordSym::Var(x) => out.extend(
                subst
                    .0
                    .get(x)
                    .ok_or_else(|| WordEqError::MissingVar(x.0.clone()))?
                    .iter()
                    .copied(),
            ),
        }
    }
    Ok(out)
}

/// An assignment of finite words to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution(pub std::collections::BTreeMap<SeqVar, Sequence>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(Default::default())
    }
    pub fn bind(mut self, name: &str, vs: Sequence) -> Self {
        self.0.insert(SeqVar::new(name), vs);
        self
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.0 {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{k} = {}", crate::value::display_sequence(v))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverVerdict {
    Sat(Substitution),
    Unsat,
    /// The bound that was exhausted without a definitive answer.
    Unknown(usize),
}

impl SolverVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolverVerdict::Sat(_))
    }
}

/// The solving alphabet: `content` input letters followed by fresh
/// generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<Value>,
    content: usize,
}

impl Alphabet {
    /// Content letters (sorted, deduplicated) followed by `fresh` generator
    /// letters, each a natural above every occurring natural.
    pub fn new(content: &[Value], fresh: usize) -> Alphabet {
        let mut letters: Vec<Value> = content.to_vec();
        letters.sort();
        letters.dedup();
        let mut max = 0u64;
        for l in &letters {
            if let Some(n) = l.as_loc() {
                max = max.max(n);
            }
        }
        let content_len = letters.len();
        for i in 1..=fresh as u64 {
            letters.push(Value::Nat(max + i));
        }
        Alphabet { letters, content: content_len }
    }

    /// The alphabet for a formula: its occurring letters as content, one
    /// fresh generator per variable.
    pub fn for_formula(f: &WordFormula) -> Alphabet {
        let content: Vec<Value> = f.letters().into_iter().collect();
        Alphabet::new(&content, f.vars().len())
    }

    pub fn letters(&self) -> &[Value] {
        &self.letters
    }

    pub fn content_letters(&self) -> &[Value] {
        &self.letters[..self.content]
    }

    /// The two distinguished letters used by the single-equation
    /// constructions.
    pub fn distinguished_pair(&self) -> Result<(Value, Value), WordEqError> {
        if self.letters.len() < 2 {
            return Err(WordEqError::AlphabetTooSmall(self.letters.len()));
        }
        Ok((self.letters[0], self.letters[1]))
    }

    /// All words of length at most `max_len`, shortest first, letters in
    /// alphabet order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Sequence> {
        let mut out: Vec<Sequence> = vec![vec![]];
        let mut layer: Vec<Sequence> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for l in &self.letters {
                    let mut e = w.clone();
                    e.push(*l);
                    next.push(e);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

/// Ground Boolean evaluation of `f` under a total substitution. Quantified
/// variables must also be bound (the substitution acts as their witness).
pub fn verify_substitution(f: &WordFormula, subst: &Substitution) -> Result<bool, WordEqError> {
    match f {
        WordFormula::Eq(a, b) => Ok(term_of_values(a, subst)? == term_of_values(b, subst)?),
        WordFormula::Not(a) => Ok(!verify_substitution(a, subst)?),
        WordFormula::And(a, b) => {
            Ok(verify_substitution(a, subst)? && verify_substitution(b, subst)?)
        }
        WordFormula::Or(a, b) => {
            Ok(verify_substitution(a, subst)? || verify_substitution(b, subst)?)
        }
        WordFormula::TrueF => Ok(true),
        WordFormula::FalseF => Ok(false),
        WordFormula::ExistsSeq(v, a) => {
            if !subst.0.contains_key(v) {
                return Err(WordEqError::MissingVar(v.0.clone()));
            }
            verify_substitution(a, subst)
        }
    }
}

/// Exhaustively enumerates substitutions with values of length at most
/// `max_len`, in lexicographic order (variables sorted, earlier variables
/// more significant, values shortest-first). Returns `Sat` with the least
/// witness, exact verdicts for ground formulas, and `Unknown(max_len)`
/// otherwise.
pub fn brute_force_solve(f: &WordFormula, max_len: usize, alphabet: &Alphabet) -> SolverVerdict {
    match brute_force_find(f, max_len, alphabet) {
        Some(subst) => SolverVerdict::Sat(subst),
        None => {
            if f.vars().is_empty() {
                SolverVerdict::Unsat
            } else {
                SolverVerdict::Unknown(max_len)
            }
        }
    }
}

fn brute_force_find(f: &WordFormula, max_len: usize, alphabet: &Alphabet) -> Option<Substitution> {
    let vars: Vec<SeqVar> = f.vars().into_iter().collect();
    let words = alphabet.words_up_to(max_len);
    let mut subst = Substitution::new();
    fn rec(
        f: &WordFormula,
        vars: &[SeqVar],
        words: &[Sequence],
        subst: &mut Substitution,
    ) -> bool {
        match vars.first() {
            None => verify_substitution(f, subst).unwrap_or(false),
            Some(v) => {
                for w in words {
                    subst.0.insert(v.clone(), w.clone());
                    if rec(f, &vars[1..], words, subst) {
                        return true;
                    }
                }
                subst.0.remove(v);
                false
            }
        }
    }
    if rec(f, &vars, &words, &mut subst) {
        Some(subst)
    } else {
        None
    }
}

/// All solutions within the bound, in enumeration order. Oracle plumbing for
/// tests and small counts.
pub fn brute_force_enumerate(
    f: &WordFormula,
    max_len: usize,
    alphabet: &Alphabet,
) -> Vec<Substitution> {
    let vars: Vec<SeqVar> = f.vars().into_iter().collect();
    let words = alphabet.words_up_to(max_len);
    let mut out = Vec::new();
    let mut subst = Substitution::new();
    fn rec(
        f: &WordFormula,
        vars: &[SeqVar],
        words: &[Sequence],
        subst: &mut Substitution,
        out: &mut Vec<Substitution>,
    ) {
        match vars.first() {
            None => {
                if verify_substitution(f, subst).unwrap_or(false) {
                    out.push(subst.clone());
                }
            }
            Some(v) => {
                for w in words {
                    subst.0.insert(v.clone(), w.clone());
                    rec(f, &vars[1..], words, subst, out);
                }
                subst.0.remove(v);
            }
        }
    }
    rec(f, &vars, &words, &mut subst, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Text format: letters are naturals or nil/#, variables @-prefixed, `^`
// concatenation, `==`/`!=` between terms, `&`, `|`, `~`, parentheses.
// ---------------------------------------------------------------------------

pub fn parse_word_formula(text: &str) -> Result<WordFormula, WordEqError> {
    let mut p = WfParser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let f = p.or_level()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(WordEqError::Parse { pos: p.pos, msg: "trailing input".into() });
    }
    Ok(f)
}

struct WfParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> WfParser<'a> {
    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T, WordEqError> {
        Err(WordEqError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn or_level(&mut self) -> Result<WordFormula, WordEqError> {
        let mut acc = self.and_level()?;
        while self.peek() == Some(b'|') {
            self.pos += 1;
            let rhs = self.and_level()?;
            acc = WordFormula::Or(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn and_level(&mut self) -> Result<WordFormula, WordEqError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'&') {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = WordFormula::And(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<WordFormula, WordEqError> {
        if self.peek() == Some(b'~') {
            self.pos += 1;
            return Ok(WordFormula::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<WordFormula, WordEqError> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let f = self.or_level()?;
            if self.peek() != Some(b')') {
                return self.err("expected `)`");
            }
            self.pos += 1;
            return Ok(f);
        }
        let lhs = self.term()?;
        match self.peek() {
            Some(b'=') => {
                self.pos += 1;
                if self.src.get(self.pos) != Some(&b'=') {
                    return self.err("expected `==`");
                }
                self.pos += 1;
                let rhs = self.term()?;
                Ok(WordFormula::Eq(lhs, rhs))
            }
            Some(b'!') => {
                self.pos += 1;
                if self.src.get(self.pos) != Some(&b'=') {
                    return self.err("expected `!=`");
                }
                self.pos += 1;
                let rhs = self.term()?;
                Ok(WordFormula::Not(Box::new(WordFormula::Eq(lhs, rhs))))
            }
            _ => self.err("expected `==` or `!=`"),
        }
    }

    fn term(&mut self) -> Result<WordTerm, WordEqError> {
        let mut out = vec![self.sym()?];
        while self.peek() == Some(b'^') {
            self.pos += 1;
            out.push(self.sym()?);
        }
        Ok(out)
    }

    fn sym(&mut self) -> Result<WordSym, WordEqError> {
        match self.peek() {
            Some(b'@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(
                    self.src.get(self.pos),
                    Some(b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_' | b'\'')
                ) {
                    self.pos += 1;
                }
                if self.pos == start {
                    return self.err("expected a variable name after `@`");
                }
                Ok(WordSym::Var(SeqVar::new(
                    std::str::from_utf8(&self.src[start..self.pos]).unwrap(),
                )))
            }
            Some(b'#') => {
                self.pos += 1;
                Ok(WordSym::Letter(Value::Hash))
            }
            Some(b'0'..=b'9') => {
                let mut n = 0u64;
                while let Some(d @ b'0'..=b'9') = self.src.get(self.pos).copied() {
                    n = n * 10 + (d - b'0') as u64;
                    self.pos += 1;
                }
                Ok(WordSym::Letter(Value::Nat(n)))
            }
            Some(b'n') => {
                if self.src[self.pos..].starts_with(b"nil") {
                    self.pos += 3;
                    Ok(WordSym::Letter(Value::Nil))
                } else {
                    self.err("expected a letter or variable")
                }
            }
            _ => self.err("expected a letter or variable"),
        }
    }
}

pub fn display_word_term(t: &WordTerm) -> String {
    if t.is_empty() {
        return "eps".into();
    }
    t.iter()
        .map(|s| match s {
            WordSym::Letter(v) => v.to_string(),
            WordSym::Var(x) => format!("@{}", x.0),
        })
        .collect::<Vec<_>>()
        .join(" ^ ")
}

impl fmt::Display for WordFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordFormula::Eq(a, b) => {
                write!(f, "{} == {}", display_word_term(a), display_word_term(b))
            }
            WordFormula::Not(a) => write!(f, "~({a})"),
            WordFormula::And(a, b) => write!(f, "({a} & {b})"),
            WordFormula::Or(a, b) => write!(f, "({a} | {b})"),
            WordFormula::TrueF => write!(f, "(eps == eps)"),
            WordFormula::FalseF => write!(f, "~(eps == eps)"),
            WordFormula::ExistsSeq(v, a) => write!(f, "exists @{}. {a}", v.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(&[Value::Nat(1), Value::Nat(2)], 0)
    }

    #[test]
    fn brute_force_least_witness() {
        // @x == @x is satisfied by the empty word first
        let f = parse_word_formula("@x == @x").unwrap();
        match brute_force_solve(&f, 2, &ab()) {
            SolverVerdict::Sat(s) => assert_eq!(s.0[&SeqVar::new("x")], vec![]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ground_formulas_are_exact() {
        let f = parse_word_formula("1 == 2").unwrap();
        assert_eq!(brute_force_solve(&f, 0, &ab()), SolverVerdict::Unsat);
        let g = parse_word_formula("1 ^ 2 == 1 ^ 2").unwrap();
        assert!(brute_force_solve(&g, 0, &ab()).is_sat());
    }

    #[test]
    fn negated_tautology_is_unknown_for_the_oracle() {
        let f = parse_word_formula("~(@x == @x)").unwrap();
        assert_eq!(brute_force_solve(&f, 3, &ab()), SolverVerdict::Unknown(3));
    }

    #[test]
    fn verify_ground() {
        let f = parse_word_formula("@x == 1 ^ 2").unwrap();
        let s = Substitution::new().bind("x", vec![Value::Nat(1), Value::Nat(2)]);
        assert!(verify_substitution(&f, &s).unwrap());
        let g = parse_word_formula("~(@x == 1)").unwrap();
        let s1 = Substitution::new().bind("x", vec![Value::Nat(1)]);
        assert!(!verify_substitution(&g, &s1).unwrap());
    }

    #[test]
    fn concatenation_splits_of_two_letters() {
        // @x ^ @y == 1 ^ 2 has exactly three solutions up to length 2
        let f = parse_word_formula("@x ^ @y == 1 ^ 2").unwrap();
        let sols = brute_force_enumerate(&f, 2, &ab());
        assert_eq!(sols.len(), 3);
    }

    #[test]
    fn parse_and_display() {
        let f = parse_word_formula("(@a == 1 ^ 2 | @a != nil) & ~(# == 2)").unwrap();
        let again = parse_word_formula(&f.to_string()).unwrap();
        assert_eq!(f, again);
    }
}
