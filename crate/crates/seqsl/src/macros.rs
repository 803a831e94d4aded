//! The derived-predicate library. Every macro expands purely syntactically
//! into the core connectives, with binder names freshened against everything
//! already used in the input formula.
//!
//! Index and length arguments must be numeric literals: the logic has no
//! arithmetic, so lengths unfold into concatenation patterns. Quantified
//! positions ranging over single elements are covered by a choice of a
//! program variable, `nil`, or `#` per position (program variables never
//! take atom values, so the atoms are spelled out).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{fresh_name, Formula, MacroArg, MacroCall};
use crate::term::{IndTerm, ProgVar, SeqLeaf, SeqTerm, SeqVar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MacroError {
    #[error("unknown macro `{0}`")]
    Unknown(String),
    #[error("macro `{name}`: {msg}")]
    BadCall { name: String, msg: String },
}

const MACRO_NAMES: &[&str] = &[
    "septraction",
    "hookarrow",
    "alloc",
    "alloc_pseqsl",
    "in",
    "len_eq",
    "len_le",
    "len_ge",
    "eq",
    "lookup",
    "eq_at",
    "find_eq",
    "Inc",
    "Diff",
    "Seg",
    "Trunc",
    "ini",
    "Outdeg",
    "reachn",
    "reach",
    "sapling",
    "IncIndex",
    "two_tier",
];

pub fn macro_exists(name: &str) -> bool {
    MACRO_NAMES.contains(&name)
}

/// `x |-> s * true`: the cell for `x` is somewhere in the heap.
pub(crate) fn hook(x: IndTerm, s: SeqTerm) -> Formula {
    Formula::sep(Formula::PointsTo(x, s), Formula::True)
}

/// `nil ^ s == s ^ nil`: `s` is a block of `nil`s.
pub(crate) fn nil_block(s: SeqTerm) -> Formula {
    Formula::SeqEq(
        SeqTerm::concat(SeqTerm::Ind(IndTerm::Nil), s.clone()),
        SeqTerm::concat(s, SeqTerm::Ind(IndTerm::Nil)),
    )
}

/// Rewrites every macro call into core connectives.
pub fn expand_macros(f: &Formula) -> Result<Formula, MacroError> {
    let mut used = used_names(f);
    expand(f, &mut used)
}

/// Collects every variable name (free or bound, either sort) so fresh
/// binders never collide with the input.
fn used_names(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_names(f, &mut out);
    out
}

fn collect_names(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::IndEq(a, b) => {
            term_names(&SeqTerm::Ind(a.clone()), out);
            term_names(&SeqTerm::Ind(b.clone()), out);
        }
        Formula::SeqEq(a, b) => {
            term_names(a, out);
            term_names(b, out);
        }
        Formula::PointsTo(t, s) => {
            term_names(&SeqTerm::Ind(t.clone()), out);
            term_names(s, out);
        }
        Formula::ExistsProg(x, body) => {
            out.insert(x.0.clone());
            collect_names(body, out);
        }
        Formula::ExistsSeq(a, body) => {
            out.insert(a.0.clone());
            collect_names(body, out);
        }
        Formula::Not(a) => collect_names(a, out),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::SepConj(a, b)
        | Formula::MagicWand(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
        Formula::Macro(m) => {
            for arg in &m.args {
                match arg {
                    MacroArg::Ind(t) => term_names(&SeqTerm::Ind(t.clone()), out),
                    MacroArg::Seq(s) => term_names(s, out),
                    MacroArg::Formula(g) => collect_names(g, out),
                }
            }
        }
        Formula::True | Formula::False | Formula::Emp => {}
    }
}

fn term_names(s: &SeqTerm, out: &mut BTreeSet<String>) {
    for leaf in s.flatten() {
        match leaf {
            SeqLeaf::Ind(IndTerm::Var(x)) => {
                out.insert(x.0);
            }
            SeqLeaf::Var(a) => {
                out.insert(a.0);
            }
            _ => {}
        }
    }
}

fn expand(f: &Formula, used: &mut BTreeSet<String>) -> Result<Formula, MacroError> {
    Ok(match f {
        Formula::Macro(m) => {
            let body = expand_call(m, used)?;
            // expansions may themselves contain macro calls (reach, eq, ...)
            expand(&body, used)?
        }
        Formula::Not(a) => Formula::not(expand(a, used)?),
        Formula::And(a, b) => Formula::and(expand(a, used)?, expand(b, used)?),
        Formula::Or(a, b) => Formula::or(expand(a, used)?, expand(b, used)?),
        Formula::Implies(a, b) => Formula::implies(expand(a, used)?, expand(b, used)?),
        Formula::SepConj(a, b) => Formula::sep(expand(a, used)?, expand(b, used)?),
        Formula::MagicWand(a, b) => Formula::wand(expand(a, used)?, expand(b, used)?),
        Formula::ExistsProg(x, body) => {
            Formula::ExistsProg(x.clone(), Box::new(expand(body, used)?))
        }
        Formula::ExistsSeq(a, body) => Formula::ExistsSeq(a.clone(), Box::new(expand(body, used)?)),
        other => other.clone(),
    })
}

struct Args<'a> {
    name: &'a str,
    args: &'a [MacroArg],
}

impl<'a> Args<'a> {
    fn bad<T>(&self, msg: impl Into<String>) -> Result<T, MacroError> {
        Err(MacroError::BadCall { name: self.name.to_string(), msg: msg.into() })
    }

    fn arity(&self, n: usize) -> Result<(), MacroError> {
        if self.args.len() == n {
            Ok(())
        } else {
            self.bad(format!("expects {n} argument(s), got {}", self.args.len()))
        }
    }

    fn ind(&self, i: usize) -> Result<IndTerm, MacroError> {
        match &self.args[i] {
            MacroArg::Ind(t) => Ok(t.clone()),
            MacroArg::Seq(SeqTerm::Ind(t)) => Ok(t.clone()),
            _ => self.bad(format!("argument {} must be an individual term", i + 1)),
        }
    }

    fn seq(&self, i: usize) -> Result<SeqTerm, MacroError> {
        match &self.args[i] {
            MacroArg::Seq(s) => Ok(s.clone()),
            MacroArg::Ind(t) => Ok(SeqTerm::Ind(t.clone())),
            _ => self.bad(format!("argument {} must be a sequence term", i + 1)),
        }
    }

    fn nat(&self, i: usize) -> Result<u64, MacroError> {
        match &self.args[i] {
            MacroArg::Ind(IndTerm::Nat(n)) | MacroArg::Seq(SeqTerm::Ind(IndTerm::Nat(n))) => Ok(*n),
            _ => self.bad(format!("argument {} must be a numeric literal", i + 1)),
        }
    }

    fn formula(&self, i: usize) -> Result<Formula, MacroError> {
        match &self.args[i] {
            MacroArg::Formula(g) => Ok(g.as_ref().clone()),
            _ => self.bad(format!("argument {} must be a formula", i + 1)),
        }
    }
}

const MAX_LITERAL: u64 = 8;

fn expand_call(m: &MacroCall, used: &mut BTreeSet<String>) -> Result<Formula, MacroError> {
    let a = Args { name: &m.name, args: &m.args };
    match m.name.as_str() {
        "septraction" => {
            a.arity(2)?;
            let (l, r) = (a.formula(0)?, a.formula(1)?);
            Ok(Formula::not(Formula::wand(l, Formula::not(r))))
        }
        "hookarrow" => {
            a.arity(2)?;
            Ok(hook(a.ind(0)?, a.seq(1)?))
        }
        "alloc" => {
            a.arity(1)?;
            let x = a.ind(0)?;
            let v = fresh_name("a", used);
            Ok(Formula::ExistsSeq(
                SeqVar::new(v.clone()),
                Box::new(hook(x, SeqTerm::var(v))),
            ))
        }
        "alloc_pseqsl" => {
            a.arity(1)?;
            Ok(Formula::wand(
                Formula::PointsTo(a.ind(0)?, SeqTerm::Ind(IndTerm::Nil)),
                Formula::False,
            ))
        }
        "in" => {
            a.arity(2)?;
            let x = a.ind(0)?;
            let s = a.seq(1)?;
            Ok(membership(x, s, used))
        }
        "len_eq" => {
            a.arity(2)?;
            let s = a.seq(0)?;
            let n = a.nat(1)?;
            check_literal(&a, n)?;
            Ok(len_eq(s, n as usize, used))
        }
        "len_le" => {
            a.arity(2)?;
            let s = a.seq(0)?;
            let n = a.nat(1)?;
            check_literal(&a, n)?;
            Ok(Formula::or_all((0..=n as usize).map(|k| len_eq(s.clone(), k, used))))
        }
        "len_ge" => {
            a.arity(2)?;
            let s = a.seq(0)?;
            let n = a.nat(1)?;
            check_literal(&a, n)?;
            let rest = fresh_name("r", used);
            let body = prefix_patterns(n as usize, SeqTerm::var(rest.clone()), &s, used);
            Ok(Formula::ExistsSeq(SeqVar::new(rest), Box::new(body)))
        }
        "eq" | "lookup" => {
            a.arity(3)?;
            let x = a.ind(0)?;
            let s = a.seq(1)?;
            let k = a.nat(2)?;
            check_literal(&a, k)?;
            if k == 0 {
                return a.bad("item indices start at 1");
            }
            Ok(lookup_at(x, s, k, used))
        }
        "eq_at" => {
            a.arity(4)?;
            let s1 = a.seq(0)?;
            let k1 = a.nat(1)?;
            let s2 = a.seq(2)?;
            let k2 = a.nat(3)?;
            check_literal(&a, k1.max(k2))?;
            if k1 == 0 || k2 == 0 {
                return a.bad("item indices start at 1");
            }
            let x = fresh_name("v", used);
            let xt = IndTerm::var(x.clone());
            Ok(Formula::ExistsProg(
                ProgVar::new(x),
                Box::new(Formula::and(
                    lookup_at(xt.clone(), s1, k1, used),
                    lookup_at(xt, s2, k2, used),
                )),
            ))
        }
        "find_eq" => {
            a.arity(3)?;
            let s = a.seq(0)?;
            let x = a.ind(1)?;
            let k = a.nat(2)?;
            check_literal(&a, k)?;
            Ok(occurrences(s, x, k as usize, used))
        }
        "Inc" => {
            a.arity(2)?;
            let s = a.seq(0)?;
            let bound = a.nat(1)?;
            if bound > 64 {
                return a.bad("universe bound too large");
            }
            Ok(increasing(s, bound, used))
        }
        "Diff" => {
            a.arity(1)?;
            Ok(pairwise_distinct(a.seq(0)?, used))
        }
        "Seg" => {
            a.arity(2)?;
            let sub = a.seq(0)?;
            let sup = a.seq(1)?;
            let l = fresh_name("l", used);
            let r = fresh_name("r", used);
            Ok(Formula::exists_seq(
                l.clone(),
                Formula::exists_seq(
                    r.clone(),
                    Formula::SeqEq(
                        sup,
                        SeqTerm::concat_all([SeqTerm::var(l), sub, SeqTerm::var(r)]),
                    ),
                ),
            ))
        }
        "Trunc" => {
            a.arity(4)?;
            let res = a.seq(0)?;
            let src = a.seq(1)?;
            let lo = a.nat(2)?;
            let hi = a.nat(3)?;
            check_literal(&a, hi)?;
            if lo == 0 || hi < lo {
                return a.bad("index range must satisfy 1 <= lo <= hi");
            }
            let l = fresh_name("l", used);
            let r = fresh_name("r", used);
            let pre = SeqTerm::var(l.clone());
            let decomposed = Formula::SeqEq(
                src,
                SeqTerm::concat_all([pre.clone(), res.clone(), SeqTerm::var(r.clone())]),
            );
            let len_pre = len_eq(pre.clone(), (lo - 1) as usize, used);
            let len_pre_res = len_eq(SeqTerm::concat(pre, res), (hi - 1) as usize, used);
            Ok(Formula::exists_seq(
                l,
                Formula::exists_seq(
                    r,
                    Formula::and_all([decomposed, len_pre, len_pre_res]),
                ),
            ))
        }
        "ini" => {
            a.arity(1)?;
            Ok(nil_block(a.seq(0)?))
        }
        "Outdeg" => {
            a.arity(2)?;
            let x = a.ind(0)?;
            let n = a.nat(1)?;
            check_literal(&a, n)?;
            let locs = fresh_name("l", used);
            let data = fresh_name("d", used);
            let cell = SeqTerm::concat_all([
                SeqTerm::var(locs.clone()),
                SeqTerm::Ind(IndTerm::Hash),
                SeqTerm::var(data.clone()),
            ]);
            Ok(Formula::exists_seq(
                locs.clone(),
                Formula::exists_seq(
                    data,
                    Formula::and(hook(x, cell), len_eq(SeqTerm::var(locs), n as usize, used)),
                ),
            ))
        }
        "reachn" => {
            a.arity(3)?;
            let x = a.ind(0)?;
            let y = a.ind(1)?;
            let n = a.nat(2)?;
            check_literal(&a, n)?;
            if n == 0 {
                return Ok(Formula::IndEq(x, y));
            }
            let mid = fresh_name("m", used);
            let step = edge(x, IndTerm::var(mid.clone()), used);
            let rest = Formula::Macro(MacroCall {
                name: "reachn".into(),
                args: vec![
                    MacroArg::Ind(IndTerm::var(mid.clone())),
                    MacroArg::Ind(y),
                    MacroArg::Ind(IndTerm::Nat(n - 1)),
                ],
            });
            Ok(Formula::ExistsProg(
                ProgVar::new(mid),
                Box::new(Formula::sep(step, rest)),
            ))
        }
        "reach" => {
            a.arity(3)?;
            let x = a.ind(0)?;
            let y = a.ind(1)?;
            let n = a.nat(2)?;
            check_literal(&a, n)?;
            Ok(Formula::or_all((0..=n).map(|k| {
                Formula::Macro(MacroCall {
                    name: "reachn".into(),
                    args: vec![
                        MacroArg::Ind(x.clone()),
                        MacroArg::Ind(y.clone()),
                        MacroArg::Ind(IndTerm::Nat(k)),
                    ],
                })
            })))
        }
        "sapling" => {
            a.arity(2)?;
            let x0 = match a.ind(0)? {
                IndTerm::Var(v) => v,
                _ => return a.bad("expects program variables"),
            };
            let x0p = match a.ind(1)? {
                IndTerm::Var(v) => v,
                _ => return a.bad("expects program variables"),
            };
            Ok(crate::minsky::sapling(&x0, &x0p))
        }
        "IncIndex" => {
            a.arity(2)?;
            let s = a.seq(0)?;
            let n = a.nat(1)?;
            if n > 32 {
                return a.bad("length bound too large");
            }
            // strictly increasing naturals of length n+1 from 1 to n+1 are
            // exactly 1,2,...,n+1
            let ladder =
                SeqTerm::concat_all((1..=n + 1).map(|k| SeqTerm::Ind(IndTerm::Nat(k))));
            Ok(Formula::SeqEq(s, ladder))
        }
        "two_tier" => {
            a.arity(2)?;
            let x = a.ind(0)?;
            let locs = a.seq(1)?;
            let y = fresh_name("y", used);
            let data = fresh_name("d", used);
            // the index cell owns its part of the heap outright; only the
            // per-entry cells use the somewhere-in-the-heap form
            let head = Formula::PointsTo(
                x,
                SeqTerm::concat_all([
                    locs.clone(),
                    SeqTerm::Ind(IndTerm::Hash),
                    SeqTerm::Empty,
                ]),
            );
            let yv = IndTerm::var(y.clone());
            let tier = Formula::forall_prog(
                y.clone(),
                Formula::exists_seq(
                    data.clone(),
                    Formula::implies(
                        membership(yv.clone(), locs, used),
                        hook(
                            yv,
                            SeqTerm::concat_all([
                                SeqTerm::Empty,
                                SeqTerm::Ind(IndTerm::Hash),
                                SeqTerm::var(data),
                            ]),
                        ),
                    ),
                ),
            );
            Ok(Formula::sep(head, tier))
        }
        other => Err(MacroError::Unknown(other.to_string())),
    }
}

fn check_literal(a: &Args, n: u64) -> Result<(), MacroError> {
    if n > MAX_LITERAL {
        a.bad(format!("literal {n} exceeds the expansion limit {MAX_LITERAL}"))
    } else {
        Ok(())
    }
}

/// `exists l r. s == l ^ x ^ r`
fn membership(x: IndTerm, s: SeqTerm, used: &mut BTreeSet<String>) -> Formula {
    let l = fresh_name("l", used);
    let r = fresh_name("r", used);
    Formula::exists_seq(
        l.clone(),
        Formula::exists_seq(
            r.clone(),
            Formula::SeqEq(
                s,
                SeqTerm::concat_all([SeqTerm::var(l), SeqTerm::Ind(x), SeqTerm::var(r)]),
            ),
        ),
    )
}

/// `|s| == n`: a disjunction over element patterns, each position either a
/// fresh program variable, `nil`, or `#`.
fn len_eq(s: SeqTerm, n: usize, used: &mut BTreeSet<String>) -> Formula {
    if n == 0 {
        return Formula::SeqEq(s, SeqTerm::Empty);
    }
    let mut disjuncts = Vec::new();
    for mask in 0..3u32.pow(n as u32) {
        let mut m = mask;
        let mut binders = Vec::new();
        let mut parts = Vec::new();
        for _ in 0..n {
            match m % 3 {
                0 => {
                    let v = fresh_name("e", used);
                    binders.push(v.clone());
                    parts.push(SeqTerm::Ind(IndTerm::var(v)));
                }
                1 => parts.push(SeqTerm::Ind(IndTerm::Nil)),
                _ => parts.push(SeqTerm::Ind(IndTerm::Hash)),
            }
            m /= 3;
        }
        let mut body = Formula::SeqEq(s.clone(), SeqTerm::concat_all(parts));
        for b in binders.into_iter().rev() {
            body = Formula::exists_prog(b, body);
        }
        disjuncts.push(body);
    }
    Formula::or_all(disjuncts)
}

/// `|s| >= n` via an n-element prefix followed by a remainder variable.
fn prefix_patterns(n: usize, rest: SeqTerm, s: &SeqTerm, used: &mut BTreeSet<String>) -> Formula {
    if n == 0 {
        return Formula::SeqEq(s.clone(), rest);
    }
    let mut disjuncts = Vec::new();
    for mask in 0..3u32.pow(n as u32) {
        let mut m = mask;
        let mut binders = Vec::new();
        let mut parts = Vec::new();
        for _ in 0..n {
            match m % 3 {
                0 => {
                    let v = fresh_name("e", used);
                    binders.push(v.clone());
                    parts.push(SeqTerm::Ind(IndTerm::var(v)));
                }
                1 => parts.push(SeqTerm::Ind(IndTerm::Nil)),
                _ => parts.push(SeqTerm::Ind(IndTerm::Hash)),
            }
            m /= 3;
        }
        parts.push(rest.clone());
        let mut body = Formula::SeqEq(s.clone(), SeqTerm::concat_all(parts));
        for b in binders.into_iter().rev() {
            body = Formula::exists_prog(b, body);
        }
        disjuncts.push(body);
    }
    Formula::or_all(disjuncts)
}

/// The k-th item of `s` is `x`.
fn lookup_at(x: IndTerm, s: SeqTerm, k: u64, used: &mut BTreeSet<String>) -> Formula {
    let l = fresh_name("l", used);
    let r = fresh_name("r", used);
    let pre = SeqTerm::var(l.clone());
    let decomposed = Formula::SeqEq(
        s,
        SeqTerm::concat_all([pre.clone(), SeqTerm::Ind(x), SeqTerm::var(r.clone())]),
    );
    let len = len_eq(pre, (k - 1) as usize, used);
    Formula::exists_seq(l, Formula::exists_seq(r, Formula::and(decomposed, len)))
}

/// `x` occurs exactly `k` times in `s`.
fn occurrences(s: SeqTerm, x: IndTerm, k: usize, used: &mut BTreeSet<String>) -> Formula {
    if k == 0 {
        return Formula::not(membership(x, s, used));
    }
    let gaps: Vec<String> = (0..=k).map(|_| fresh_name("g", used)).collect();
    let mut parts = Vec::new();
    for (i, g) in gaps.iter().enumerate() {
        if i > 0 {
            parts.push(SeqTerm::Ind(x.clone()));
        }
        parts.push(SeqTerm::var(g.clone()));
    }
    let mut body = Formula::SeqEq(s, SeqTerm::concat_all(parts));
    for g in &gaps {
        body = Formula::and(body, Formula::not(membership(x.clone(), SeqTerm::var(g.clone()), used)));
    }
    for g in gaps.into_iter().rev() {
        body = Formula::exists_seq(g, body);
    }
    body
}

/// Strict increase over an explicit finite universe `0..=bound`; the order
/// relation unfolds into a disjunction of value pairs.
fn increasing(s: SeqTerm, bound: u64, used: &mut BTreeSet<String>) -> Formula {
    let x1 = fresh_name("u", used);
    let x2 = fresh_name("w", used);
    let (g1, g2, g3) = (
        fresh_name("l", used),
        fresh_name("m", used),
        fresh_name("r", used),
    );
    let decomposed = Formula::SeqEq(
        s,
        SeqTerm::concat_all([
            SeqTerm::var(g1.clone()),
            SeqTerm::Ind(IndTerm::var(x1.clone())),
            SeqTerm::var(g2.clone()),
            SeqTerm::Ind(IndTerm::var(x2.clone())),
            SeqTerm::var(g3.clone()),
        ]),
    );
    let mut pairs = Vec::new();
    for u in 0..bound {
        for w in (u + 1)..=bound {
            pairs.push(Formula::and(
                Formula::IndEq(IndTerm::var(x1.clone()), IndTerm::Nat(u)),
                Formula::IndEq(IndTerm::var(x2.clone()), IndTerm::Nat(w)),
            ));
        }
    }
    let ordered = Formula::or_all(pairs);
    Formula::forall_prog(
        x1,
        Formula::forall_prog(
            x2,
            Formula::forall_seq(
                g1,
                Formula::forall_seq(
                    g2,
                    Formula::forall_seq(g3, Formula::implies(decomposed, ordered)),
                ),
            ),
        ),
    )
}

/// Each two items at different positions differ.
fn pairwise_distinct(s: SeqTerm, used: &mut BTreeSet<String>) -> Formula {
    let x1 = fresh_name("u", used);
    let x2 = fresh_name("w", used);
    let (g1, g2, g3) = (
        fresh_name("l", used),
        fresh_name("m", used),
        fresh_name("r", used),
    );
    let decomposed = Formula::SeqEq(
        s,
        SeqTerm::concat_all([
            SeqTerm::var(g1.clone()),
            SeqTerm::Ind(IndTerm::var(x1.clone())),
            SeqTerm::var(g2.clone()),
            SeqTerm::Ind(IndTerm::var(x2.clone())),
            SeqTerm::var(g3.clone()),
        ]),
    );
    let distinct = Formula::not(Formula::IndEq(
        IndTerm::var(x1.clone()),
        IndTerm::var(x2.clone()),
    ));
    Formula::forall_prog(
        x1,
        Formula::forall_prog(
            x2,
            Formula::forall_seq(
                g1,
                Formula::forall_seq(
                    g2,
                    Formula::forall_seq(g3, Formula::implies(decomposed, distinct)),
                ),
            ),
        ),
    )
}

/// One-step edge `x -> y`: `y` appears in the location part of `x`'s cell.
fn edge(x: IndTerm, y: IndTerm, used: &mut BTreeSet<String>) -> Formula {
    let l1 = fresh_name("l", used);
    let l2 = fresh_name("r", used);
    let d = fresh_name("d", used);
    let cell = SeqTerm::concat_all([
        SeqTerm::var(l1.clone()),
        SeqTerm::Ind(y),
        SeqTerm::var(l2.clone()),
        SeqTerm::Ind(IndTerm::Hash),
        SeqTerm::var(d.clone()),
    ]);
    Formula::exists_seq(
        l1,
        Formula::exists_seq(l2, Formula::exists_seq(d, hook(x, cell))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::free_program_vars;
    use crate::parser::parse_formula;

    #[test]
    fn alloc_pseqsl_is_the_wand_form() {
        let f = parse_formula("alloc_pseqsl(x)").unwrap();
        let e = expand_macros(&f).unwrap();
        assert_eq!(
            e,
            Formula::wand(
                Formula::PointsTo(IndTerm::var("x"), SeqTerm::Ind(IndTerm::Nil)),
                Formula::False
            )
        );
    }

    #[test]
    fn ini_is_the_commutation_equation() {
        let f = parse_formula("ini(@a)").unwrap();
        let e = expand_macros(&f).unwrap();
        assert_eq!(e, parse_formula("nil ^ @a == @a ^ nil").unwrap());
    }

    #[test]
    fn membership_expands_to_a_decomposition() {
        let f = parse_formula("in(x, @a)").unwrap();
        let e = expand_macros(&f).unwrap();
        assert_eq!(e, parse_formula("exists @l. exists @r. @a == @l ^ x ^ @r").unwrap());
    }

    #[test]
    fn fresh_names_do_not_leak() {
        for text in [
            "in(x, @a)",
            "alloc(x)",
            "Outdeg(x, 2)",
            "reachn(x, y, 2)",
            "Diff(@a)",
            "find_eq(@a, x, 1)",
            "two_tier(x, @a)",
        ] {
            let f = parse_formula(text).unwrap();
            let before = free_program_vars(&f);
            let e = expand_macros(&f).unwrap();
            assert_eq!(free_program_vars(&e), before, "free vars changed for {text}");
            assert!(!e.contains_macro());
        }
    }

    #[test]
    fn septraction_duality_shape() {
        let f = parse_formula("emp -o emp").unwrap();
        let e = expand_macros(&f).unwrap();
        assert_eq!(
            e,
            Formula::not(Formula::wand(Formula::Emp, Formula::not(Formula::Emp)))
        );
    }

    #[test]
    fn inc_index_is_a_ladder() {
        let f = parse_formula("IncIndex(@a, 2)").unwrap();
        let e = expand_macros(&f).unwrap();
        assert_eq!(e, parse_formula("@a == 1 ^ 2 ^ 3").unwrap());
    }

    #[test]
    fn arity_is_checked() {
        let f = parse_formula("alloc(x, y)").unwrap();
        assert!(matches!(expand_macros(&f), Err(MacroError::BadCall { .. })));
    }
}
