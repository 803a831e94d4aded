//! Prenex analysis and fragment classification.
//!
//! Quantifiers hoist across `!`, `/\`, `\/` and `=>` by the classical rules
//! (after making binders globally unique); they are never hoisted across `*`
//! or `-*`, so classification refuses formulas with quantifiers under a
//! spatial connective.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{subst_prog, subst_seq, Formula};
use crate::macros::{expand_macros, MacroError};
use crate::term::{IndTerm, SeqTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quant {
    Exists,
    Forall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSort {
    Prog,
    Seq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixEntry {
    pub quant: Quant,
    pub sort: VarSort,
    pub name: String,
}

/// Shape tags for the fragments the toolkit cares about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Quantifier-free or purely existential prefix (implicit existential
    /// closure).
    Sigma1,
    /// Purely universal prefix.
    Pi1,
    /// Prenex `forall x* exists x* exists a*`: a universal block of program
    /// variables followed by existentials.
    ForallExists,
    /// A conjunction of purely universal parts and `forall x* exists*` parts;
    /// the two-sided fragment used by the counter-machine encoding.
    ForallCapForallExists,
    Other,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Sigma1 => write!(f, "Sigma1"),
            Shape::Pi1 => write!(f, "Pi1"),
            Shape::ForallExists => write!(f, "Ax*Ex*Ea*"),
            Shape::ForallCapForallExists => write!(f, "Ax*Aa* ∩ Ax*Ex*Ea*"),
            Shape::Other => write!(f, "other"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentClass {
    pub quantifier_free: bool,
    pub prenex_prog_blocks: usize,
    pub prenex_seq_blocks: usize,
    pub shape: Shape,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("classification refused: {0}")]
    Refused(String),
    #[error(transparent)]
    Macro(#[from] MacroError),
}

/// Renames binders so every binder name is globally unique. A binder keeps
/// its name unless it clashes with a free variable or an earlier choice;
/// replacement names additionally avoid every name occurring anywhere in the
/// formula, so no renaming is ever captured by an inner binder.
struct Renamer {
    /// Free variables and names already chosen.
    taken: BTreeSet<String>,
    /// Every name occurring in the input, binders included.
    reserved: BTreeSet<String>,
}

impl Renamer {
    fn pick(&mut self, base: &str) -> String {
        if self.taken.insert(base.to_string()) {
            return base.to_string();
        }
        for i in 1.. {
            let cand = format!("{base}{i}");
            if !self.taken.contains(&cand) && !self.reserved.contains(&cand) {
                self.taken.insert(cand.clone());
                return cand;
            }
        }
        unreachable!()
    }
}

fn alpha_rename(f: &Formula, r: &mut Renamer) -> Formula {
    match f {
        Formula::ExistsProg(x, body) => {
            let nx = r.pick(&x.0);
            let renamed = if nx == x.0 {
                body.as_ref().clone()
            } else {
                subst_prog(body, x, &IndTerm::var(nx.clone()))
            };
            Formula::exists_prog(nx, alpha_rename(&renamed, r))
        }
        Formula::ExistsSeq(a, body) => {
            let na = r.pick(&a.0);
            let renamed = if na == a.0 {
                body.as_ref().clone()
            } else {
                subst_seq(body, a, &SeqTerm::var(na.clone()))
            };
            Formula::exists_seq(na, alpha_rename(&renamed, r))
        }
        Formula::Not(a) => Formula::not(alpha_rename(a, r)),
        Formula::And(a, b) => Formula::and(alpha_rename(a, r), alpha_rename(b, r)),
        Formula::Or(a, b) => Formula::or(alpha_rename(a, r), alpha_rename(b, r)),
        Formula::Implies(a, b) => Formula::implies(alpha_rename(a, r), alpha_rename(b, r)),
        Formula::SepConj(a, b) => Formula::sep(alpha_rename(a, r), alpha_rename(b, r)),
        Formula::MagicWand(a, b) => Formula::wand(alpha_rename(a, r), alpha_rename(b, r)),
        other => other.clone(),
    }
}

fn flip(prefix: &mut [PrefixEntry]) {
    for e in prefix {
        e.quant = match e.quant {
            Quant::Exists => Quant::Forall,
            Quant::Forall => Quant::Exists,
        };
    }
}

/// Extracts the quantifier prefix; requires binders to be globally unique
/// (see [`alpha_rename`]).
fn pull_prefix(f: &Formula) -> Result<(Vec<PrefixEntry>, Formula), ClassifyError> {
    match f {
        Formula::ExistsProg(x, body) => {
            let (mut p, m) = pull_prefix(body)?;
            p.insert(
                0,
                PrefixEntry { quant: Quant::Exists, sort: VarSort::Prog, name: x.0.clone() },
            );
            Ok((p, m))
        }
        Formula::ExistsSeq(a, body) => {
            let (mut p, m) = pull_prefix(body)?;
            p.insert(
                0,
                PrefixEntry { quant: Quant::Exists, sort: VarSort::Seq, name: a.0.clone() },
            );
            Ok((p, m))
        }
        Formula::Not(a) => {
            let (mut p, m) = pull_prefix(a)?;
            flip(&mut p);
            Ok((p, Formula::not(m)))
        }
        Formula::And(a, b) => {
            let (mut pa, ma) = pull_prefix(a)?;
            let (pb, mb) = pull_prefix(b)?;
            pa.extend(pb);
            Ok((pa, Formula::and(ma, mb)))
        }
        Formula::Or(a, b) => {
            let (mut pa, ma) = pull_prefix(a)?;
            let (pb, mb) = pull_prefix(b)?;
            pa.extend(pb);
            Ok((pa, Formula::or(ma, mb)))
        }
        Formula::Implies(a, b) => {
            let (mut pa, ma) = pull_prefix(a)?;
            flip(&mut pa);
            let (pb, mb) = pull_prefix(b)?;
            pa.extend(pb);
            Ok((pa, Formula::implies(ma, mb)))
        }
        Formula::SepConj(a, b) | Formula::MagicWand(a, b) => {
            if a.contains_quantifier() || b.contains_quantifier() {
                Err(ClassifyError::Refused(
                    "quantifier under a spatial connective cannot be hoisted".into(),
                ))
            } else {
                Ok((vec![], f.clone()))
            }
        }
        Formula::Macro(m) => Err(ClassifyError::Refused(format!(
            "unexpanded macro `{}`",
            m.name
        ))),
        other => Ok((vec![], other.clone())),
    }
}

fn blocks(prefix: &[PrefixEntry], sort: VarSort) -> usize {
    let mut count = 0;
    let mut last: Option<Quant> = None;
    for e in prefix.iter().filter(|e| e.sort == sort) {
        if last != Some(e.quant) {
            count += 1;
            last = Some(e.quant);
        }
    }
    count
}

fn all_quant(prefix: &[PrefixEntry], q: Quant) -> bool {
    prefix.iter().all(|e| e.quant == q)
}

/// `forall x* exists*`: a universal prefix of program variables only,
/// followed by existentials of either sort.
fn forall_exists_compatible(prefix: &[PrefixEntry]) -> bool {
    let first_exists = prefix
        .iter()
        .position(|e| e.quant == Quant::Exists)
        .unwrap_or(prefix.len());
    prefix[..first_exists].iter().all(|e| e.sort == VarSort::Prog)
        && prefix[first_exists..].iter().all(|e| e.quant == Quant::Exists)
}

fn flatten_and(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        other => out.push(other.clone()),
    }
}

/// Classifies a formula into the fragment taxonomy. The formula must be in
/// prenex form, quantifier-free, or a conjunction whose conjuncts hoist to
/// prenex form.
pub fn classify(f: &Formula) -> Result<FragmentClass, ClassifyError> {
    let f = expand_macros(f)?;
    let f = alpha_rename(&f, &mut renamer_for(&f));

    if !f.contains_quantifier() {
        return Ok(FragmentClass {
            quantifier_free: true,
            prenex_prog_blocks: 0,
            prenex_seq_blocks: 0,
            shape: Shape::Sigma1,
        });
    }

    let mut conjuncts = Vec::new();
    flatten_and(&f, &mut conjuncts);
    let prefixed: Vec<(Vec<PrefixEntry>, Formula)> = conjuncts
        .iter()
        .map(pull_prefix)
        .collect::<Result<_, _>>()?;

    let merged: Vec<PrefixEntry> =
        prefixed.iter().flat_map(|(p, _)| p.iter().cloned()).collect();

    if prefixed.iter().all(|(p, _)| all_quant(p, Quant::Exists)) {
        return Ok(FragmentClass {
            quantifier_free: false,
            prenex_prog_blocks: blocks(&merged, VarSort::Prog),
            prenex_seq_blocks: blocks(&merged, VarSort::Seq),
            shape: Shape::Sigma1,
        });
    }
    if prefixed.iter().all(|(p, _)| all_quant(p, Quant::Forall)) {
        return Ok(FragmentClass {
            quantifier_free: false,
            prenex_prog_blocks: blocks(&merged, VarSort::Prog).min(1),
            prenex_seq_blocks: blocks(&merged, VarSort::Seq).min(1),
            shape: Shape::Pi1,
        });
    }
    if prefixed.iter().all(|(p, _)| forall_exists_compatible(p)) {
        // conjuncts are independent after renaming, so the universal program
        // prefixes commute to the front
        let prog = prefixed.iter().map(|(p, _)| blocks(p, VarSort::Prog)).max().unwrap_or(0);
        let seq = prefixed.iter().map(|(p, _)| blocks(p, VarSort::Seq)).max().unwrap_or(0);
        return Ok(FragmentClass {
            quantifier_free: false,
            prenex_prog_blocks: prog,
            prenex_seq_blocks: seq,
            shape: Shape::ForallExists,
        });
    }
    if prefixed
        .iter()
        .all(|(p, _)| all_quant(p, Quant::Forall) || forall_exists_compatible(p))
    {
        let prog = prefixed.iter().map(|(p, _)| blocks(p, VarSort::Prog)).max().unwrap_or(0);
        let seq = prefixed.iter().map(|(p, _)| blocks(p, VarSort::Seq)).max().unwrap_or(0);
        return Ok(FragmentClass {
            quantifier_free: false,
            prenex_prog_blocks: prog,
            prenex_seq_blocks: seq,
            shape: Shape::ForallCapForallExists,
        });
    }
    Ok(FragmentClass {
        quantifier_free: false,
        prenex_prog_blocks: blocks(&merged, VarSort::Prog),
        prenex_seq_blocks: blocks(&merged, VarSort::Seq),
        shape: Shape::Other,
    })
}

/// Prenexes the whole formula, returning the prefix and matrix. Used by the
/// validity decision to strip a universal prefix.
pub fn prenex(f: &Formula) -> Result<(Vec<PrefixEntry>, Formula), ClassifyError> {
    let f = expand_macros(f)?;
    let f = alpha_rename(&f, &mut renamer_for(&f));
    pull_prefix(&f)
}

fn renamer_for(f: &Formula) -> Renamer {
    let mut taken: BTreeSet<String> = BTreeSet::new();
    for v in crate::formula::free_program_vars(f) {
        taken.insert(v.0);
    }
    for v in crate::formula::free_seq_vars(f) {
        taken.insert(v.0);
    }
    let mut reserved = taken.clone();
    collect_binders(f, &mut reserved);
    Renamer { taken, reserved }
}

fn collect_binders(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::ExistsProg(x, body) => {
            out.insert(x.0.clone());
            collect_binders(body, out);
        }
        Formula::ExistsSeq(a, body) => {
            out.insert(a.0.clone());
            collect_binders(body, out);
        }
        Formula::Not(a) => collect_binders(a, out),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::SepConj(a, b)
        | Formula::MagicWand(a, b) => {
            collect_binders(a, out);
            collect_binders(b, out);
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    #[test]
    fn quantifier_free_is_sigma1() {
        let f = parse_formula("emp * x |-> @a => false").unwrap();
        let c = classify(&f).unwrap();
        assert!(c.quantifier_free);
        assert_eq!(c.prenex_prog_blocks, 0);
        assert_eq!(c.prenex_seq_blocks, 0);
        assert_eq!(c.shape, Shape::Sigma1);
    }

    #[test]
    fn universal_prefix_is_pi1() {
        let f = parse_formula("forall x. forall @a. x |-> @a => false").unwrap();
        let c = classify(&f).unwrap();
        assert_eq!(c.shape, Shape::Pi1);
        assert_eq!(c.prenex_prog_blocks, 1);
        assert_eq!(c.prenex_seq_blocks, 1);
    }

    #[test]
    fn forall_exists_prefix() {
        let f = parse_formula("forall x. exists y. exists @a. x ~> y ^ @a").unwrap();
        let c = classify(&f).unwrap();
        assert_eq!(c.shape, Shape::ForallExists);
        assert_eq!(c.prenex_prog_blocks, 2);
        assert_eq!(c.prenex_seq_blocks, 1);
    }

    #[test]
    fn single_program_alternation_counts_once() {
        let f = parse_formula("forall x. exists @a. x |-> @a").unwrap();
        let c = classify(&f).unwrap();
        assert_eq!(c.shape, Shape::ForallExists);
        assert_eq!(c.prenex_prog_blocks, 1);
        assert_eq!(c.prenex_seq_blocks, 1);
    }

    #[test]
    fn refuses_quantifier_under_star() {
        let f = parse_formula("(exists x. x |-> eps) * emp").unwrap();
        assert!(matches!(classify(&f), Err(ClassifyError::Refused(_))));
    }

    #[test]
    fn hoists_through_negation() {
        // !(exists x. !(x = x)) is a universal in disguise
        let f = parse_formula("!(exists x. !(x = x))").unwrap();
        let c = classify(&f).unwrap();
        assert_eq!(c.shape, Shape::Pi1);
    }
}
