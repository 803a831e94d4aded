//! The formula AST together with its structural analyses: desugaring into the
//! propositional core, the size measure that drives the small-model bounds,
//! free variables, the syntactic set of sequence terms, and substitution.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::{IndTerm, ProgVar, SeqLeaf, SeqTerm, SeqVar};

/// A macro (derived predicate) invocation, kept in the tree until
/// [`crate::macros::expand_macros`] rewrites it away.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MacroCall {
    pub name: String,
    pub args: Vec<MacroArg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MacroArg {
    Ind(IndTerm),
    Seq(SeqTerm),
    Formula(Box<Formula>),
}

/// A formula of sequence-heap separation logic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `t = t'` between individual terms.
    IndEq(IndTerm, IndTerm),
    /// `t == t'` between sequence terms.
    SeqEq(SeqTerm, SeqTerm),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    True,
    False,
    Emp,
    /// `t |-> s`: the heap is exactly one cell at `t` storing `s`.
    PointsTo(IndTerm, SeqTerm),
    SepConj(Box<Formula>, Box<Formula>),
    MagicWand(Box<Formula>, Box<Formula>),
    ExistsProg(ProgVar, Box<Formula>),
    ExistsSeq(SeqVar, Box<Formula>),
    Macro(MacroCall),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("formula is outside the propositional fragment: {0}")]
    NotPropositional(String),
    #[error("unexpanded macro `{0}`")]
    UnexpandedMacro(String),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn sep(a: Formula, b: Formula) -> Formula {
        Formula::SepConj(Box::new(a), Box::new(b))
    }
    pub fn wand(a: Formula, b: Formula) -> Formula {
        Formula::MagicWand(Box::new(a), Box::new(b))
    }
    pub fn exists_prog(x: impl Into<String>, f: Formula) -> Formula {
        Formula::ExistsProg(ProgVar::new(x), Box::new(f))
    }
    pub fn exists_seq(a: impl Into<String>, f: Formula) -> Formula {
        Formula::ExistsSeq(SeqVar::new(a), Box::new(f))
    }
    /// `forall x. f` as its defining form `!(exists x. !f)`.
    pub fn forall_prog(x: impl Into<String>, f: Formula) -> Formula {
        Formula::not(Formula::exists_prog(x, Formula::not(f)))
    }
    pub fn forall_seq(a: impl Into<String>, f: Formula) -> Formula {
        Formula::not(Formula::exists_seq(a, Formula::not(f)))
    }
    /// Conjunction of all parts; `true` when empty.
    pub fn and_all<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }
    pub fn or_all<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::False,
            Some(first) => it.fold(first, Formula::or),
        }
    }
    pub fn sep_all<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::Emp,
            Some(first) => it.fold(first, Formula::sep),
        }
    }

    /// Rewrites `!`, `/\`, `\/` and `true` through `=>` and `false`, leaving
    /// only the propositional-core connectives (plus quantifiers and macros
    /// untouched).
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::Not(a) => Formula::implies(a.desugar(), Formula::False),
            Formula::And(a, b) => Formula::implies(
                Formula::implies(a.desugar(), Formula::implies(b.desugar(), Formula::False)),
                Formula::False,
            ),
            Formula::Or(a, b) => {
                Formula::implies(Formula::implies(a.desugar(), Formula::False), b.desugar())
            }
            Formula::True => Formula::implies(Formula::False, Formula::False),
            Formula::Implies(a, b) => Formula::implies(a.desugar(), b.desugar()),
            Formula::SepConj(a, b) => Formula::sep(a.desugar(), b.desugar()),
            Formula::MagicWand(a, b) => Formula::wand(a.desugar(), b.desugar()),
            Formula::ExistsProg(x, f) => Formula::ExistsProg(x.clone(), Box::new(f.desugar())),
            Formula::ExistsSeq(a, f) => Formula::ExistsSeq(a.clone(), Box::new(f.desugar())),
            Formula::IndEq(..)
            | Formula::SeqEq(..)
            | Formula::False
            | Formula::Emp
            | Formula::PointsTo(..)
            | Formula::Macro(..) => self.clone(),
        }
    }

    pub fn contains_quantifier(&self) -> bool {
        match self {
            Formula::ExistsProg(..) | Formula::ExistsSeq(..) => true,
            _ => self.children().iter().any(|c| c.contains_quantifier()),
        }
    }

    pub fn contains_macro(&self) -> bool {
        match self {
            Formula::Macro(_) => true,
            _ => self.children().iter().any(|c| c.contains_macro()),
        }
    }

    /// Heap-independent formulas: no `emp`, points-to or spatial connective.
    pub fn is_pure(&self) -> bool {
        match self {
            Formula::Emp | Formula::PointsTo(..) | Formula::SepConj(..) | Formula::MagicWand(..) => {
                false
            }
            Formula::Macro(_) => false,
            _ => self.children().iter().all(|c| c.is_pure()),
        }
    }

    fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Not(a) => vec![a],
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::SepConj(a, b)
            | Formula::MagicWand(a, b) => vec![a, b],
            Formula::ExistsProg(_, f) | Formula::ExistsSeq(_, f) => vec![f],
            Formula::Macro(m) => m
                .args
                .iter()
                .filter_map(|a| match a {
                    MacroArg::Formula(f) => Some(f.as_ref()),
                    _ => None,
                })
                .collect(),
            _ => vec![],
        }
    }
}

/// Checks membership in the decidable propositional fragment: connectives
/// restricted to `=`, `==`, `false`, `=>`, `emp`, `|->`, `*`, `-*` with
/// individual terms drawn from `nil`, `#` and variables, and a variable on
/// the left of every `|->`. The sugared connectives `!`, `/\`, `\/`, `true`
/// are accepted (they desugar through `=>` and `false`).
pub fn ensure_pseqsl(f: &Formula) -> Result<(), FormulaError> {
    fn term_ok(t: &IndTerm) -> Result<(), FormulaError> {
        match t {
            IndTerm::Nat(n) => Err(FormulaError::NotPropositional(format!(
                "numeric constant {n} is not an individual term of the fragment"
            ))),
            _ => Ok(()),
        }
    }
    fn seq_ok(s: &SeqTerm) -> Result<(), FormulaError> {
        for leaf in s.flatten() {
            if let SeqLeaf::Ind(t) = leaf {
                term_ok(&t)?;
            }
        }
        Ok(())
    }
    match f {
        Formula::IndEq(a, b) => {
            term_ok(a)?;
            term_ok(b)
        }
        Formula::SeqEq(a, b) => {
            seq_ok(a)?;
            seq_ok(b)
        }
        Formula::True | Formula::False | Formula::Emp => Ok(()),
        Formula::PointsTo(t, s) => {
            match t {
                IndTerm::Var(_) => {}
                other => {
                    return Err(FormulaError::NotPropositional(format!(
                        "`|->` needs a program variable on the left, got `{other}`"
                    )))
                }
            }
            seq_ok(s)
        }
        Formula::Not(a) => ensure_pseqsl(a),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::SepConj(a, b)
        | Formula::MagicWand(a, b) => {
            ensure_pseqsl(a)?;
            ensure_pseqsl(b)
        }
        Formula::ExistsProg(..) | Formula::ExistsSeq(..) => Err(FormulaError::NotPropositional(
            "quantifiers are outside the propositional fragment".to_string(),
        )),
        Formula::Macro(m) => Err(FormulaError::UnexpandedMacro(m.name.clone())),
    }
}

/// The size measure bounding heap candidates for `-*`: 0 for equalities and
/// `false`, 1 for `emp` and `|->`, max over `=>`, sum over `*`, and the right
/// operand for `-*`. Defined on the propositional core only.
pub fn formula_size(f: &Formula) -> Result<u64, FormulaError> {
    match f {
        Formula::IndEq(..) | Formula::SeqEq(..) | Formula::False => Ok(0),
        Formula::Emp | Formula::PointsTo(..) => Ok(1),
        Formula::Implies(a, b) => Ok(formula_size(a)?.max(formula_size(b)?)),
        Formula::SepConj(a, b) => Ok(formula_size(a)? + formula_size(b)?),
        Formula::MagicWand(_, b) => formula_size(b),
        other => Err(FormulaError::NotPropositional(format!(
            "size is defined on the propositional core, found `{}`",
            head_name(other)
        ))),
    }
}

/// Like [`formula_size`] but total: sugared connectives are measured through
/// their desugaring, quantifiers through their bodies. Used to default
/// checker bounds.
pub fn size_bound(f: &Formula) -> u64 {
    match f {
        Formula::IndEq(..) | Formula::SeqEq(..) | Formula::False | Formula::True => 0,
        Formula::Emp | Formula::PointsTo(..) => 1,
        Formula::Not(a) => size_bound(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            size_bound(a).max(size_bound(b))
        }
        Formula::SepConj(a, b) => size_bound(a) + size_bound(b),
        Formula::MagicWand(_, b) => size_bound(b),
        Formula::ExistsProg(_, f) | Formula::ExistsSeq(_, f) => size_bound(f),
        Formula::Macro(_) => 1,
    }
}

fn head_name(f: &Formula) -> &'static str {
    match f {
        Formula::IndEq(..) => "=",
        Formula::SeqEq(..) => "==",
        Formula::Not(..) => "!",
        Formula::And(..) => "/\\",
        Formula::Or(..) => "\\/",
        Formula::Implies(..) => "=>",
        Formula::True => "true",
        Formula::False => "false",
        Formula::Emp => "emp",
        Formula::PointsTo(..) => "|->",
        Formula::SepConj(..) => "*",
        Formula::MagicWand(..) => "-*",
        Formula::ExistsProg(..) => "exists x",
        Formula::ExistsSeq(..) => "exists @a",
        Formula::Macro(..) => "macro",
    }
}

fn ind_term_fpv(t: &IndTerm, out: &mut BTreeSet<ProgVar>) {
    if let IndTerm::Var(x) = t {
        out.insert(x.clone());
    }
}

fn seq_term_fpv(s: &SeqTerm, out: &mut BTreeSet<ProgVar>) {
    for leaf in s.flatten() {
        if let SeqLeaf::Ind(t) = leaf {
            ind_term_fpv(&t, out);
        }
    }
}

/// Free program variables, extended through quantifiers by removing bound
/// names.
pub fn free_program_vars(f: &Formula) -> BTreeSet<ProgVar> {
    let mut out = BTreeSet::new();
    collect_fpv(f, &mut out);
    out
}

fn collect_fpv(f: &Formula, out: &mut BTreeSet<ProgVar>) {
    match f {
        Formula::IndEq(a, b) => {
            ind_term_fpv(a, out);
            ind_term_fpv(b, out);
        }
        Formula::SeqEq(a, b) => {
            seq_term_fpv(a, out);
            seq_term_fpv(b, out);
        }
        Formula::PointsTo(t, s) => {
            ind_term_fpv(t, out);
            seq_term_fpv(s, out);
        }
        Formula::ExistsProg(x, body) => {
            let mut inner = BTreeSet::new();
            collect_fpv(body, &mut inner);
            inner.remove(x);
            out.extend(inner);
        }
        Formula::ExistsSeq(_, body) => collect_fpv(body, out),
        Formula::Macro(m) => {
            for arg in &m.args {
                match arg {
                    MacroArg::Ind(t) => ind_term_fpv(t, out),
                    MacroArg::Seq(s) => seq_term_fpv(s, out),
                    MacroArg::Formula(g) => collect_fpv(g, out),
                }
            }
        }
        _ => {
            for c in f.children() {
                collect_fpv(c, out);
            }
        }
    }
}

/// Free sequence variables.
pub fn free_seq_vars(f: &Formula) -> BTreeSet<SeqVar> {
    let mut out = BTreeSet::new();
    collect_fsv(f, &mut out);
    out
}

fn collect_fsv(f: &Formula, out: &mut BTreeSet<SeqVar>) {
    match f {
        Formula::SeqEq(a, b) => {
            out.extend(a.seq_vars());
            out.extend(b.seq_vars());
        }
        Formula::PointsTo(_, s) => out.extend(s.seq_vars()),
        Formula::ExistsSeq(a, body) => {
            let mut inner = BTreeSet::new();
            collect_fsv(body, &mut inner);
            inner.remove(a);
            out.extend(inner);
        }
        Formula::ExistsProg(_, body) => collect_fsv(body, out),
        Formula::Macro(m) => {
            for arg in &m.args {
                match arg {
                    MacroArg::Seq(s) => out.extend(s.seq_vars()),
                    MacroArg::Formula(g) => collect_fsv(g, out),
                    MacroArg::Ind(_) => {}
                }
            }
        }
        _ => {
            for c in f.children() {
                collect_fsv(c, out);
            }
        }
    }
}

/// The syntactic set of sequence terms: both sides of every equality, and for
/// `x |-> s` both `x` (as a one-element sequence term) and `s`. Unions over
/// all other connectives and quantifier bodies.
pub fn seq_terms(f: &Formula) -> BTreeSet<SeqTerm> {
    let mut out = BTreeSet::new();
    collect_seq_terms(f, &mut out);
    out
}

fn collect_seq_terms(f: &Formula, out: &mut BTreeSet<SeqTerm>) {
    match f {
        Formula::IndEq(a, b) => {
            out.insert(SeqTerm::Ind(a.clone()));
            out.insert(SeqTerm::Ind(b.clone()));
        }
        Formula::SeqEq(a, b) => {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        Formula::PointsTo(t, s) => {
            out.insert(SeqTerm::Ind(t.clone()));
            out.insert(s.clone());
        }
        Formula::Macro(m) => {
            for arg in &m.args {
                match arg {
                    MacroArg::Ind(t) => {
                        out.insert(SeqTerm::Ind(t.clone()));
                    }
                    MacroArg::Seq(s) => {
                        out.insert(s.clone());
                    }
                    MacroArg::Formula(g) => collect_seq_terms(g, out),
                }
            }
        }
        _ => {
            for c in f.children() {
                collect_seq_terms(c, out);
            }
        }
    }
}

/// Substitutes an individual term for every free occurrence of a program
/// variable. Stops at shadowing binders.
pub fn subst_prog(f: &Formula, x: &ProgVar, t: &IndTerm) -> Formula {
    let st = |term: &IndTerm| -> IndTerm {
        match term {
            IndTerm::Var(y) if y == x => t.clone(),
            other => other.clone(),
        }
    };
    let ss = |s: &SeqTerm| -> SeqTerm { subst_seqterm_prog(s, x, t) };
    match f {
        Formula::IndEq(a, b) => Formula::IndEq(st(a), st(b)),
        Formula::SeqEq(a, b) => Formula::SeqEq(ss(a), ss(b)),
        Formula::PointsTo(a, s) => Formula::PointsTo(st(a), ss(s)),
        Formula::ExistsProg(y, _) if y == x => f.clone(),
        Formula::ExistsProg(y, body) => {
            Formula::ExistsProg(y.clone(), Box::new(subst_prog(body, x, t)))
        }
        Formula::ExistsSeq(a, body) => {
            Formula::ExistsSeq(a.clone(), Box::new(subst_prog(body, x, t)))
        }
        Formula::Not(a) => Formula::not(subst_prog(a, x, t)),
        Formula::And(a, b) => Formula::and(subst_prog(a, x, t), subst_prog(b, x, t)),
        Formula::Or(a, b) => Formula::or(subst_prog(a, x, t), subst_prog(b, x, t)),
        Formula::Implies(a, b) => Formula::implies(subst_prog(a, x, t), subst_prog(b, x, t)),
        Formula::SepConj(a, b) => Formula::sep(subst_prog(a, x, t), subst_prog(b, x, t)),
        Formula::MagicWand(a, b) => Formula::wand(subst_prog(a, x, t), subst_prog(b, x, t)),
        Formula::Macro(m) => Formula::Macro(MacroCall {
            name: m.name.clone(),
            args: m
                .args
                .iter()
                .map(|arg| match arg {
                    MacroArg::Ind(a) => MacroArg::Ind(st(a)),
                    MacroArg::Seq(s) => MacroArg::Seq(ss(s)),
                    MacroArg::Formula(g) => MacroArg::Formula(Box::new(subst_prog(g, x, t))),
                })
                .collect(),
        }),
        Formula::True | Formula::False | Formula::Emp => f.clone(),
    }
}

fn subst_seqterm_prog(s: &SeqTerm, x: &ProgVar, t: &IndTerm) -> SeqTerm {
    match s {
        SeqTerm::Ind(IndTerm::Var(y)) if y == x => SeqTerm::Ind(t.clone()),
        SeqTerm::Concat(a, b) => {
            SeqTerm::concat(subst_seqterm_prog(a, x, t), subst_seqterm_prog(b, x, t))
        }
        other => other.clone(),
    }
}

/// Substitutes a sequence term for every free occurrence of a sequence
/// variable. Stops at shadowing binders.
pub fn subst_seq(f: &Formula, a: &SeqVar, t: &SeqTerm) -> Formula {
    let ss = |s: &SeqTerm| -> SeqTerm { subst_seqterm_seq(s, a, t) };
    match f {
        Formula::SeqEq(l, r) => Formula::SeqEq(ss(l), ss(r)),
        Formula::PointsTo(x, s) => Formula::PointsTo(x.clone(), ss(s)),
        Formula::ExistsSeq(b, _) if b == a => f.clone(),
        Formula::ExistsSeq(b, body) => Formula::ExistsSeq(b.clone(), Box::new(subst_seq(body, a, t))),
        Formula::ExistsProg(x, body) => {
            Formula::ExistsProg(x.clone(), Box::new(subst_seq(body, a, t)))
        }
        Formula::Not(g) => Formula::not(subst_seq(g, a, t)),
        Formula::And(l, r) => Formula::and(subst_seq(l, a, t), subst_seq(r, a, t)),
        Formula::Or(l, r) => Formula::or(subst_seq(l, a, t), subst_seq(r, a, t)),
        Formula::Implies(l, r) => Formula::implies(subst_seq(l, a, t), subst_seq(r, a, t)),
        Formula::SepConj(l, r) => Formula::sep(subst_seq(l, a, t), subst_seq(r, a, t)),
        Formula::MagicWand(l, r) => Formula::wand(subst_seq(l, a, t), subst_seq(r, a, t)),
        Formula::Macro(m) => Formula::Macro(MacroCall {
            name: m.name.clone(),
            args: m
                .args
                .iter()
                .map(|arg| match arg {
                    MacroArg::Ind(x) => MacroArg::Ind(x.clone()),
                    MacroArg::Seq(s) => MacroArg::Seq(ss(s)),
                    MacroArg::Formula(g) => MacroArg::Formula(Box::new(subst_seq(g, a, t))),
                })
                .collect(),
        }),
        Formula::IndEq(..) | Formula::True | Formula::False | Formula::Emp => f.clone(),
    }
}

fn subst_seqterm_seq(s: &SeqTerm, a: &SeqVar, t: &SeqTerm) -> SeqTerm {
    match s {
        SeqTerm::Var(b) if b == a => t.clone(),
        SeqTerm::Concat(l, r) => {
            SeqTerm::concat(subst_seqterm_seq(l, a, t), subst_seqterm_seq(r, a, t))
        }
        other => other.clone(),
    }
}

/// Collects every natural number constant occurring in the formula's terms.
pub fn nat_constants(f: &Formula) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for s in seq_terms(f) {
        for leaf in s.flatten() {
            if let SeqLeaf::Ind(IndTerm::Nat(n)) = leaf {
                out.insert(n);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Printing. Precedence, low to high: quantifiers, `=>` (right), `\/`, `/\`,
// `-*`/`-o` (right), `*`, `!`, atoms. `forall` is recognized from its
// defining shape `!(exists v. !body)` so formulas built through the sugar
// print back the way they were written.
// ---------------------------------------------------------------------------

const PREC_QUANT: u8 = 0;
const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_WAND: u8 = 4;
const PREC_SEP: u8 = 5;
const PREC_NOT: u8 = 6;
const PREC_ATOM: u8 = 7;

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, PREC_QUANT, f)
    }
}

fn write_prec(fm: &Formula, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = formula_prec(fm);
    if prec < min {
        write!(f, "(")?;
        write_prec(fm, PREC_QUANT, f)?;
        return write!(f, ")");
    }
    match fm {
        Formula::IndEq(a, b) => write!(f, "{a} = {b}"),
        Formula::SeqEq(a, b) => write!(f, "{a} == {b}"),
        Formula::True => write!(f, "true"),
        Formula::False => write!(f, "false"),
        Formula::Emp => write!(f, "emp"),
        Formula::PointsTo(t, s) => write!(f, "{t} |-> {s}"),
        Formula::Not(inner) => {
            // forall sugar: !(exists v. !body)
            match inner.as_ref() {
                Formula::ExistsProg(x, body) => {
                    if let Formula::Not(b) = body.as_ref() {
                        write!(f, "forall {x}. ")?;
                        return write_prec(b, PREC_QUANT, f);
                    }
                }
                Formula::ExistsSeq(a, body) => {
                    if let Formula::Not(b) = body.as_ref() {
                        write!(f, "forall {a}. ")?;
                        return write_prec(b, PREC_QUANT, f);
                    }
                }
                _ => {}
            }
            write!(f, "!")?;
            write_prec(inner, PREC_NOT, f)
        }
        Formula::And(a, b) => {
            write_prec(a, PREC_AND, f)?;
            write!(f, " /\\ ")?;
            write_prec(b, PREC_AND + 1, f)
        }
        Formula::Or(a, b) => {
            write_prec(a, PREC_OR, f)?;
            write!(f, " \\/ ")?;
            write_prec(b, PREC_OR + 1, f)
        }
        Formula::Implies(a, b) => {
            write_prec(a, PREC_IMPLIES + 1, f)?;
            write!(f, " => ")?;
            write_prec(b, PREC_IMPLIES, f)
        }
        Formula::SepConj(a, b) => {
            write_prec(a, PREC_SEP, f)?;
            write!(f, " * ")?;
            write_prec(b, PREC_SEP + 1, f)
        }
        Formula::MagicWand(a, b) => {
            write_prec(a, PREC_WAND + 1, f)?;
            write!(f, " -* ")?;
            write_prec(b, PREC_WAND, f)
        }
        Formula::ExistsProg(x, body) => {
            write!(f, "exists {x}. ")?;
            write_prec(body, PREC_QUANT, f)
        }
        Formula::ExistsSeq(a, body) => {
            write!(f, "exists {a}. ")?;
            write_prec(body, PREC_QUANT, f)
        }
        Formula::Macro(m) => match (m.name.as_str(), m.args.as_slice()) {
            ("septraction", [MacroArg::Formula(a), MacroArg::Formula(b)]) => {
                write_prec(a, PREC_WAND + 1, f)?;
                write!(f, " -o ")?;
                write_prec(b, PREC_WAND, f)
            }
            ("hookarrow", [MacroArg::Ind(t), MacroArg::Seq(s)]) => write!(f, "{t} ~> {s}"),
            _ => {
                write!(f, "{}(", m.name)?;
                let mut first = true;
                for arg in &m.args {
                    if !first {
                        write!(f, ", ")?;
                    }
                    first = false;
                    match arg {
                        MacroArg::Ind(t) => write!(f, "{t}")?,
                        MacroArg::Seq(s) => write!(f, "{s}")?,
                        MacroArg::Formula(g) => write!(f, "{g}")?,
                    }
                }
                write!(f, ")")
            }
        },
    }
}

fn formula_prec(fm: &Formula) -> u8 {
    match fm {
        Formula::Implies(..) => PREC_IMPLIES,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        Formula::MagicWand(..) => PREC_WAND,
        Formula::SepConj(..) => PREC_SEP,
        Formula::Not(inner) => {
            // the forall sugar prints as a quantifier
            match inner.as_ref() {
                Formula::ExistsProg(_, body) | Formula::ExistsSeq(_, body)
                    if matches!(body.as_ref(), Formula::Not(_)) =>
                {
                    PREC_QUANT
                }
                _ => PREC_NOT,
            }
        }
        Formula::ExistsProg(..) | Formula::ExistsSeq(..) => PREC_QUANT,
        Formula::Macro(m) => match (m.name.as_str(), m.args.as_slice()) {
            ("septraction", [MacroArg::Formula(_), MacroArg::Formula(_)]) => PREC_WAND,
            _ => PREC_ATOM,
        },
        _ => PREC_ATOM,
    }
}

/// Produces a name not in `used`, then reserves it: `base`, `base1`, `base2`,
/// ... in order.
pub fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    if used.insert(base.to_string()) {
        return base.to_string();
    }
    for i in 1.. {
        let cand = format!("{base}{i}");
        if used.insert(cand.clone()) {
            return cand;
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> IndTerm {
        IndTerm::var("x")
    }

    #[test]
    fn size_of_core_formulas() {
        assert_eq!(formula_size(&Formula::Emp).unwrap(), 1);
        assert_eq!(formula_size(&Formula::False).unwrap(), 0);
        // (x |-> a) * (y |-> b -* false): 1 + sz(false) = 1
        let f = Formula::sep(
            Formula::PointsTo(x(), SeqTerm::var("a")),
            Formula::wand(
                Formula::PointsTo(IndTerm::var("y"), SeqTerm::var("b")),
                Formula::False,
            ),
        );
        assert_eq!(formula_size(&f).unwrap(), 1);
        assert!(formula_size(&Formula::and(Formula::Emp, Formula::Emp)).is_err());
    }

    #[test]
    fn size_is_additive_under_sep() {
        let cell = Formula::PointsTo(x(), SeqTerm::Empty);
        let f = Formula::sep(cell.clone(), Formula::sep(cell.clone(), cell));
        assert_eq!(formula_size(&f).unwrap(), 3);
    }

    #[test]
    fn free_vars_through_binders() {
        // exists x. x |-> y  has free {y}
        let f = Formula::exists_prog(
            "x",
            Formula::PointsTo(x(), SeqTerm::Ind(IndTerm::var("y"))),
        );
        let fv = free_program_vars(&f);
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), vec![ProgVar::new("y")]);
    }

    #[test]
    fn free_vars_of_points_to() {
        // x |-> (a ^ y) has free {x, y}
        let f = Formula::PointsTo(
            x(),
            SeqTerm::concat(SeqTerm::var("a"), SeqTerm::Ind(IndTerm::var("y"))),
        );
        let fv: Vec<_> = free_program_vars(&f).into_iter().collect();
        assert_eq!(fv, vec![ProgVar::new("x"), ProgVar::new("y")]);
        // sequence equality with no program-variable leaves
        let g = Formula::SeqEq(SeqTerm::var("a"), SeqTerm::var("b"));
        assert!(free_program_vars(&g).is_empty());
    }

    #[test]
    fn seq_terms_follow_the_definition() {
        assert!(seq_terms(&Formula::Emp).is_empty());
        let s = SeqTerm::concat(SeqTerm::var("a"), SeqTerm::Ind(IndTerm::var("x3")));
        let f = Formula::PointsTo(x(), s.clone());
        let ts = seq_terms(&f);
        assert!(ts.contains(&SeqTerm::Ind(x())));
        assert!(ts.contains(&s));
        assert_eq!(ts.len(), 2);

        let g = Formula::implies(
            Formula::SeqEq(SeqTerm::var("a1"), SeqTerm::var("a2")),
            Formula::False,
        );
        let ts = seq_terms(&g);
        assert_eq!(ts.len(), 2);
        assert!(ts.contains(&SeqTerm::var("a1")));
        assert!(ts.contains(&SeqTerm::var("a2")));
    }

    #[test]
    fn desugar_produces_core() {
        let f = Formula::and(Formula::Emp, Formula::not(Formula::True));
        let d = f.desugar();
        assert!(ensure_pseqsl(&d).is_ok());
    }

    #[test]
    fn pseqsl_rejects_constants_and_quantifiers() {
        assert!(ensure_pseqsl(&Formula::IndEq(IndTerm::Nat(3), x())).is_err());
        assert!(ensure_pseqsl(&Formula::exists_prog("x", Formula::Emp)).is_err());
        assert!(ensure_pseqsl(&Formula::PointsTo(IndTerm::Nil, SeqTerm::Empty)).is_err());
    }
}
