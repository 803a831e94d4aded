//! Reduction of a Boolean combination of word equations to a single word
//! equation under an existential prefix, equisatisfiable over the given
//! alphabet.
//!
//! Rules, for a distinguished letter pair n != n':
//!   - conjunction pairs left-hand sides and right-hand sides:
//!     `t1 == t2 /\ t1' == t2'` becomes `F(t1, t1') == F(t2, t2')` with
//!     `F(a, b) = a n b a n' b`;
//!   - disjunction first rewrites to a shared right side
//!     (`t1 t2' == t2 t2'  \/  t2 t1' == t2 t2'`), then `u == v \/ u' == v`
//!     becomes the factor equation `X == b Y b'` with
//!     `X = G(uu')^2 u G(uu')^2 u' G(uu')^2`, `Y = G(uu')^2 v G(uu')^2`,
//!     `G(t) = t n t n'`;
//!   - a negated equation expands into the disjunction of the two proper
//!     prefix-extension cases and the first-difference case, over fresh
//!     variables.
//!
//! Every constructor also knows how to extend a satisfying assignment of the
//! source formula to the introduced variables, which is how the tests verify
//! equisatisfiability without enumerating the (long) context words.

use std::collections::BTreeSet;

use crate::formula::fresh_name;
use crate::term::SeqVar;
use crate::value::{Sequence, Value};

use super::{
    term_of_values, Alphabet, Substitution, WordEqError, WordFormula, WordSym, WordTerm,
};

/// A single word equation under an existential prefix of introduced
/// variables (the source formula's own variables stay free).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleEquation {
    pub prefix: Vec<SeqVar>,
    pub lhs: WordTerm,
    pub rhs: WordTerm,
}

impl SingleEquation {
    pub fn as_formula(&self) -> WordFormula {
        let mut f = WordFormula::Eq(self.lhs.clone(), self.rhs.clone());
        for v in self.prefix.iter().rev() {
            f = WordFormula::ExistsSeq(v.clone(), Box::new(f));
        }
        f
    }
}

/// Extends source-formula witnesses to the introduced variables.
pub struct Lifter {
    root: Node,
}

impl Lifter {
    /// Given values for the source formula's variables, assigns every
    /// introduced variable so that (when the source formula holds) the
    /// single equation holds. Returns whether the source formula held.
    pub fn lift(&self, subst: &mut Substitution) -> Result<bool, WordEqError> {
        self.root.lift(subst)
    }
}

pub fn to_single_equation(
    f: &WordFormula,
    alphabet: &Alphabet,
) -> Result<SingleEquation, WordEqError> {
    Ok(to_single_equation_with_lift(f, alphabet)?.0)
}

pub fn to_single_equation_with_lift(
    f: &WordFormula,
    alphabet: &Alphabet,
) -> Result<(SingleEquation, Lifter), WordEqError> {
    let (n1, n2) = alphabet.distinguished_pair()?;
    let mut core = f;
    let mut prefix: Vec<SeqVar> = Vec::new();
    while let WordFormula::ExistsSeq(v, inner) = core {
        prefix.push(v.clone());
        core = inner;
    }
    let mut used: BTreeSet<String> = f.vars().into_iter().map(|v| v.0).collect();
    let mut cx = Cx { n1, n2, letters: alphabet.letters().to_vec(), used: &mut used, intro: Vec::new() };
    let root = cx.build(core, true)?;
    prefix.extend(cx.intro);
    let (lhs, rhs) = root.eq_owned();
    Ok((SingleEquation { prefix, lhs, rhs }, Lifter { root }))
}

const TERM_CAP: usize = 2_000_000;

struct Cx<'a> {
    n1: Value,
    n2: Value,
    letters: Vec<Value>,
    used: &'a mut BTreeSet<String>,
    intro: Vec<SeqVar>,
}

enum Node {
    Leaf { lhs: WordTerm, rhs: WordTerm },
    TrueLeaf,
    FalseLeaf { eq: (WordTerm, WordTerm) },
    AndN { l: Box<Node>, r: Box<Node>, eq: (WordTerm, WordTerm) },
    OrN {
        l: Box<Node>,
        r: Box<Node>,
        beta: SeqVar,
        betap: SeqVar,
        x: WordTerm,
        y: WordTerm,
        eq: (WordTerm, WordTerm),
    },
    NegExpand {
        lhs: WordTerm,
        rhs: WordTerm,
        b0: SeqVar,
        b1: SeqVar,
        b2: SeqVar,
        inner: Box<Node>,
    },
}

impl Node {
    fn lift(&self, subst: &mut Substitution) -> Result<bool, WordEqError> {
        match self {
            Node::Leaf { lhs, rhs } => {
                Ok(term_of_values(lhs, subst)? == term_of_values(rhs, subst)?)
            }
            Node::TrueLeaf => Ok(true),
            Node::FalseLeaf { .. } => Ok(false),
            Node::AndN { l, r, .. } => {
                let a = l.lift(subst)?;
                let b = r.lift(subst)?;
                Ok(a && b)
            }
            Node::OrN { l, r, beta, betap, x, y, .. } => {
                let a = l.lift(subst)?;
                let b = r.lift(subst)?;
                if a || b {
                    let xv = term_of_values(x, subst)?;
                    let yv = term_of_values(y, subst)?;
                    match find_factor(&xv, &yv) {
                        Some(i) => {
                            subst.0.insert(beta.clone(), xv[..i].to_vec());
                            subst.0.insert(betap.clone(), xv[i + yv.len()..].to_vec());
                            Ok(true)
                        }
                        None => Err(WordEqError::Unsupported(
                            "factor construction failed to embed a satisfied disjunct".into(),
                        )),
                    }
                } else {
                    subst.0.insert(beta.clone(), vec![]);
                    subst.0.insert(betap.clone(), vec![]);
                    Ok(false)
                }
            }
            Node::NegExpand { lhs, rhs, b0, b1, b2, inner } => {
                let v1 = term_of_values(lhs, subst)?;
                let v2 = term_of_values(rhs, subst)?;
                let (a0, a1, a2): (Sequence, Sequence, Sequence) = if v1 == v2 {
                    (vec![], vec![], vec![])
                } else if v1.len() > v2.len() && v1.starts_with(&v2) {
                    (v1[v2.len() + 1..].to_vec(), vec![], vec![])
                } else if v2.len() > v1.len() && v2.starts_with(&v1) {
                    (v2[v1.len() + 1..].to_vec(), vec![], vec![])
                } else {
                    let p = v1.iter().zip(&v2).take_while(|(a, b)| a == b).count();
                    (v1[..p].to_vec(), v1[p + 1..].to_vec(), v2[p + 1..].to_vec())
                };
                subst.0.insert(b0.clone(), a0);
                subst.0.insert(b1.clone(), a1);
                subst.0.insert(b2.clone(), a2);
                let held = inner.lift(subst)?;
                debug_assert_eq!(held, v1 != v2, "negation expansion truth mismatch");
                Ok(held)
            }
        }
    }

    fn eq_owned(&self) -> (WordTerm, WordTerm) {
        match self {
            Node::Leaf { lhs, rhs } => (lhs.clone(), rhs.clone()),
            Node::TrueLeaf => (vec![], vec![]),
            Node::FalseLeaf { eq } | Node::AndN { eq, .. } | Node::OrN { eq, .. } => eq.clone(),
            Node::NegExpand { inner, .. } => inner.eq_owned(),
        }
    }
}

impl<'a> Cx<'a> {
    fn fresh(&mut self) -> SeqVar {
        let name = fresh_name("b", self.used);
        let v = SeqVar::new(name);
        self.intro.push(v.clone());
        v
    }

    fn build(&mut self, f: &WordFormula, positive: bool) -> Result<Node, WordEqError> {
        match (f, positive) {
            (WordFormula::Eq(a, b), true) => Ok(Node::Leaf { lhs: a.clone(), rhs: b.clone() }),
            (WordFormula::Eq(a, b), false) => self.negate(a.clone(), b.clone()),
            (WordFormula::Not(g), _) => self.build(g, !positive),
            (WordFormula::And(a, b), true) | (WordFormula::Or(a, b), false) => {
                let l = self.build(a, positive)?;
                let r = self.build(b, positive)?;
                self.conjoin(l, r)
            }
            (WordFormula::Or(a, b), true) | (WordFormula::And(a, b), false) => {
                let l = self.build(a, positive)?;
                let r = self.build(b, positive)?;
                self.disjoin(l, r)
            }
            (WordFormula::TrueF, true) | (WordFormula::FalseF, false) => Ok(Node::TrueLeaf),
            (WordFormula::FalseF, true) | (WordFormula::TrueF, false) => {
                Ok(Node::FalseLeaf { eq: (vec![lt(self.n1)], vec![lt(self.n2)]) })
            }
            (WordFormula::ExistsSeq(_, g), true) => self.build(g, true),
            (WordFormula::ExistsSeq(..), false) => Err(WordEqError::Unsupported(
                "universal quantification is outside the transformation".into(),
            )),
        }
    }

    /// `F(x, y) = x n y x n' y`; the conjunction pairs the two left sides
    /// and the two right sides.
    fn conjoin(&mut self, l: Node, r: Node) -> Result<Node, WordEqError> {
        let (t1, t2) = l.eq_owned();
        let (t1p, t2p) = r.eq_owned();
        let pair = |a: &WordTerm, b: &WordTerm, n1: Value, n2: Value| -> WordTerm {
            let mut out = Vec::with_capacity(2 * (a.len() + b.len()) + 2);
            out.extend(a.iter().cloned());
            out.push(lt(n1));
            out.extend(b.iter().cloned());
            out.extend(a.iter().cloned());
            out.push(lt(n2));
            out.extend(b.iter().cloned());
            out
        };
        let eq = (pair(&t1, &t1p, self.n1, self.n2), pair(&t2, &t2p, self.n1, self.n2));
        self.cap(&eq)?;
        Ok(Node::AndN { l: Box::new(l), r: Box::new(r), eq })
    }

    /// Shared-right-side rewrite, then the factor construction.
    fn disjoin(&mut self, l: Node, r: Node) -> Result<Node, WordEqError> {
        let (t1, t2) = l.eq_owned();
        let (t1p, t2p) = r.eq_owned();
        let u: WordTerm = t1.iter().chain(&t2p).cloned().collect();
        let up: WordTerm = t2.iter().chain(&t1p).cloned().collect();
        let v: WordTerm = t2.iter().chain(&t2p).cloned().collect();

        // G(uu')^2
        let mut g: WordTerm = Vec::new();
        g.extend(u.iter().cloned());
        g.extend(up.iter().cloned());
        g.push(lt(self.n1));
        g.extend(u.iter().cloned());
        g.extend(up.iter().cloned());
        g.push(lt(self.n2));
        let mut g2 = g.clone();
        g2.extend(g.iter().cloned());

        let mut x: WordTerm = Vec::new();
        x.extend(g2.iter().cloned());
        x.extend(u.iter().cloned());
        x.extend(g2.iter().cloned());
        x.extend(up.iter().cloned());
        x.extend(g2.iter().cloned());
        let mut y: WordTerm = Vec::new();
        y.extend(g2.iter().cloned());
        y.extend(v.iter().cloned());
        y.extend(g2.iter().cloned());

        let beta = self.fresh();
        let betap = self.fresh();
        let mut rhs: WordTerm = vec![WordSym::Var(beta.clone())];
        rhs.extend(y.iter().cloned());
        rhs.push(WordSym::Var(betap.clone()));
        let eq = (x.clone(), rhs);
        self.cap(&eq)?;
        Ok(Node::OrN { l: Box::new(l), r: Box::new(r), beta, betap, x, y, eq })
    }

    /// The three-case expansion of `t1 != t2` over the alphabet.
    fn negate(&mut self, lhs: WordTerm, rhs: WordTerm) -> Result<Node, WordEqError> {
        let b0 = self.fresh();
        let b1 = self.fresh();
        let b2 = self.fresh();
        let mut disjuncts: Vec<Node> = Vec::new();
        // t1 extends t2 past a letter
        for n in self.letters.clone() {
            let mut r: WordTerm = rhs.clone();
            r.push(lt(n));
            r.push(WordSym::Var(b0.clone()));
            disjuncts.push(Node::Leaf { lhs: lhs.clone(), rhs: r });
        }
        // t2 extends t1 past a letter
        for n in self.letters.clone() {
            let mut r: WordTerm = lhs.clone();
            r.push(lt(n));
            r.push(WordSym::Var(b0.clone()));
            disjuncts.push(Node::Leaf { lhs: rhs.clone(), rhs: r });
        }
        // first difference
        for n in self.letters.clone() {
            for np in self.letters.clone() {
                if n == np {
                    continue;
                }
                let one = Node::Leaf {
                    lhs: lhs.clone(),
                    rhs: vec![WordSym::Var(b0.clone()), lt(n), WordSym::Var(b1.clone())],
                };
                let two = Node::Leaf {
                    lhs: rhs.clone(),
                    rhs: vec![WordSym::Var(b0.clone()), lt(np), WordSym::Var(b2.clone())],
                };
                disjuncts.push(self.conjoin(one, two)?);
            }
        }
        let inner = self.fold_disjuncts(disjuncts)?;
        Ok(Node::NegExpand { lhs, rhs, b0, b1, b2, inner: Box::new(inner) })
    }

    /// Balanced disjunction fold: the factor construction multiplies term
    /// sizes, so the fold depth (not the disjunct count) drives growth.
    fn fold_disjuncts(&mut self, mut nodes: Vec<Node>) -> Result<Node, WordEqError> {
        assert!(!nodes.is_empty());
        while nodes.len() > 1 {
            let mut next = Vec::with_capacity(nodes.len() / 2 + 1);
            let mut it = nodes.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(self.disjoin(a, b)?),
                    None => next.push(a),
                }
            }
            nodes = next;
        }
        Ok(nodes.pop().unwrap())
    }

    fn cap(&self, eq: &(WordTerm, WordTerm)) -> Result<(), WordEqError> {
        if eq.0.len() + eq.1.len() > TERM_CAP {
            Err(WordEqError::Unsupported(
                "single-equation transform exceeds the size cap".into(),
            ))
        } else {
            Ok(())
        }
    }
}

fn lt(v: Value) -> WordSym {
    WordSym::Letter(v)
}

/// First occurrence of `needle` in `haystack` (two-way scan with a failure
/// table; the constructed words are highly periodic, so the naive scan
/// degenerates).
pub fn find_factor(haystack: &[Value], needle: &[Value]) -> Option<usize> {
    if needle.is_empty() {
        return Some(0);
    }
    if needle.len() > haystack.len() {
        return None;
    }
    // KMP failure table
    let mut fail = vec![0usize; needle.len()];
    let mut k = 0;
    for i in 1..needle.len() {
        while k > 0 && needle[i] != needle[k] {
            k = fail[k - 1];
        }
        if needle[i] == needle[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let mut k = 0;
    for (i, c) in haystack.iter().enumerate() {
        while k > 0 && *c != needle[k] {
            k = fail[k - 1];
        }
        if *c == needle[k] {
            k += 1;
        }
        if k == needle.len() {
            return Some(i + 1 - k);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::{
        brute_force_enumerate, letters, parse_word_formula, var_term, verify_substitution,
    };
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(&[Value::Nat(1), Value::Nat(2)], 0)
    }

    fn a() -> Value {
        Value::Nat(1)
    }
    fn b() -> Value {
        Value::Nat(2)
    }

    #[test]
    fn single_equation_passes_through() {
        let f = parse_word_formula("@x == 1 ^ 2").unwrap();
        let se = to_single_equation(&f, &ab()).unwrap();
        assert!(se.prefix.is_empty());
        assert_eq!(se.lhs, var_term("x"));
        assert_eq!(se.rhs, letters(&[a(), b()]));
    }

    #[test]
    fn conjunction_becomes_a_pairing_equation() {
        let f = parse_word_formula("@x == 1 & @y == 2").unwrap();
        let se = to_single_equation(&f, &ab()).unwrap();
        assert!(se.prefix.is_empty());
        // x n y x n' y == 1 n 2 1 n' 2
        let wx = WordSym::Var(crate::term::SeqVar::new("x"));
        let wy = WordSym::Var(crate::term::SeqVar::new("y"));
        assert_eq!(
            se.lhs,
            vec![wx.clone(), lt(a()), wy.clone(), wx, lt(b()), wy]
        );
        assert_eq!(se.rhs, letters(&[a(), a(), b(), a(), b(), b()]));
    }

    /// Exhaustive ground check of the pairing rule.
    #[test]
    fn conjunction_rule_is_exact_on_ground_words() {
        let alpha = ab();
        let words = alpha.words_up_to(2);
        for t1 in &words {
            for t2 in &words {
                for t1p in &words {
                    for t2p in &words {
                        let source = (t1 == t2) && (t1p == t2p);
                        let mut l: Sequence = Vec::new();
                        l.extend(t1);
                        l.push(a());
                        l.extend(t1p);
                        l.extend(t1);
                        l.push(b());
                        l.extend(t1p);
                        let mut r: Sequence = Vec::new();
                        r.extend(t2);
                        r.push(a());
                        r.extend(t2p);
                        r.extend(t2);
                        r.push(b());
                        r.extend(t2p);
                        assert_eq!(source, l == r, "pairing differs at {t1:?} {t2:?} {t1p:?} {t2p:?}");
                    }
                }
            }
        }
    }

    /// Exhaustive ground check of the disjunction rule as it is actually
    /// applied: the two equations are first rewritten to share a right side
    /// (`u = t1 t2'`, `u' = t2 t1'`, `v = t2 t2'`), then the factor equation
    /// must hold exactly when one source equation does.
    #[test]
    fn factor_rule_is_exact_on_ground_words() {
        let alpha = ab();
        let words = alpha.words_up_to(2);
        for t1 in &words {
            for t2 in &words {
                for t1p in &words {
                    for t2p in &words {
                        let source = (t1 == t2) || (t1p == t2p);
                        let cat = |x: &Sequence, y: &Sequence| {
                            let mut out = x.clone();
                            out.extend(y.iter().copied());
                            out
                        };
                        let u = cat(t1, t2p);
                        let up = cat(t2, t1p);
                        let v = cat(t2, t2p);
                        let mut g: Sequence = cat(&u, &up);
                        g.push(a());
                        g.extend(cat(&u, &up));
                        g.push(b());
                        let g2 = cat(&g, &g);
                        let mut x: Sequence = g2.clone();
                        x.extend(&u);
                        x.extend(&g2);
                        x.extend(&up);
                        x.extend(&g2);
                        let mut y: Sequence = g2.clone();
                        y.extend(&v);
                        y.extend(&g2);
                        assert_eq!(
                            source,
                            find_factor(&x, &y).is_some(),
                            "factor rule differs at t1={t1:?} t2={t2:?} t1'={t1p:?} t2'={t2p:?}"
                        );
                    }
                }
            }
        }
    }

    /// The negation expansion is satisfiable exactly on unequal values.
    #[test]
    fn negation_cases_cover_inequality() {
        let alpha = ab();
        let words = alpha.words_up_to(3);
        for v1 in &words {
            for v2 in &words {
                let prefix_case = |x: &Sequence, y: &Sequence| {
                    x.len() > y.len() && x.starts_with(y)
                };
                let diff_case = {
                    let p = v1.iter().zip(v2).take_while(|(a, b)| a == b).count();
                    p < v1.len() && p < v2.len()
                };
                let covered = prefix_case(v1, v2) || prefix_case(v2, v1) || diff_case;
                assert_eq!(covered, v1 != v2);
            }
        }
    }

    /// Liftability: every satisfying source assignment extends to the single
    /// equation; the extension verifies by ground evaluation.
    #[test]
    fn lifted_witnesses_satisfy_the_single_equation() {
        let alpha = ab();
        for text in [
            "@x == 1 ^ 2",
            "@x == 1 & @y == 2",
            "@x == 1 | @x == 2 ^ 2",
            "~(@x == 1)",
            "(@x == 1 & @y == @x ^ 2) | @y == eps_replaced", // placeholder replaced below
        ] {
            let text = text.replace("@y == eps_replaced", "@y == @x");
            let f = parse_word_formula(&text).unwrap();
            let (se, lifter) = to_single_equation_with_lift(&f, &alpha).unwrap();
            let sols = brute_force_enumerate(&f, 2, &alpha);
            assert!(!sols.is_empty(), "expected some solution for {text}");
            for mut s in sols {
                assert!(lifter.lift(&mut s).unwrap(), "source witness rejected for {text}");
                let eq = WordFormula::Eq(se.lhs.clone(), se.rhs.clone());
                assert!(
                    verify_substitution(&eq, &s).unwrap(),
                    "lifted witness fails the single equation for {text}"
                );
            }
        }
    }

    #[test]
    fn transform_requires_two_letters() {
        let tiny = Alphabet::new(&[Value::Nat(1)], 0);
        let f = parse_word_formula("@x == 1 & @x == 1").unwrap();
        assert!(matches!(
            to_single_equation(&f, &tiny),
            Err(WordEqError::AlphabetTooSmall(1))
        ));
    }
}
