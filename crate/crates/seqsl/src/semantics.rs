//! The model checker.
//!
//! Quantifier-free propositional formulas are decided exactly: `*` through a
//! direct analysis of the separating operands (falling back to split
//! enumeration), `-*` by enumerating candidate heaps whose domain and range
//! come from the small-model bounds (locations from the size measure, cell
//! contents from the formula's sequence terms plus the empty sequence and one
//! provably fresh sequence).
//!
//! Quantified formulas are checked over bounded candidate universes. Before
//! enumerating, the checker scans the body for atoms that pin the possible
//! witnesses (equalities against ground terms, cell contents matched against
//! patterns); a pinned scan is conclusive, so many quantified formulas are
//! still decided exactly. Only an inconclusive bounded scan downgrades to
//! `Unknown`: an existential that failed under the bound, or a universal that
//! held under it.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::formula::{
    free_program_vars, nat_constants, seq_terms, size_bound, subst_prog, subst_seq, Formula,
};
use crate::macros::{expand_macros, MacroError};
use crate::model::{GroundHeap, Model, ModelError, SeqAssignment, Stack};
use crate::term::{IndTerm, ProgVar, SeqLeaf, SeqTerm, SeqVar};
use crate::value::{Sequence, Value};

/// Bounds for the quantified (incomplete) part of checking.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Fresh locations added beyond the heap domain and stack image; `None`
    /// derives the count from the formula's size measure.
    pub loc_universe_extra: Option<usize>,
    /// Maximum length of candidate sequences for bounded sequence
    /// quantifiers.
    pub seq_len_bound: usize,
    /// Fresh letters added beyond the occurring alphabet.
    pub alphabet_extra: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { loc_universe_extra: None, seq_len_bound: 4, alphabet_extra: 1 }
    }
}

/// A three-valued verdict; `Unknown` arises only from quantifiers (or wand
/// operands containing them) checked under a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict3 {
    True,
    False,
    Unknown(String),
}

impl Verdict3 {
    pub fn is_true(&self) -> bool {
        matches!(self, Verdict3::True)
    }
    pub fn is_false(&self) -> bool {
        matches!(self, Verdict3::False)
    }
    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict3::Unknown(_))
    }
}

impl std::fmt::Display for Verdict3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict3::True => write!(f, "True"),
            Verdict3::False => write!(f, "False"),
            Verdict3::Unknown(r) => write!(f, "Unknown ({r})"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Macro(#[from] MacroError),
}

/// Explicit candidate universes for closed-world checking, where the caller
/// asserts the candidates are exhaustive for the formulas at hand (used by
/// the machine-encoding validation).
#[derive(Debug, Clone)]
pub struct Universe {
    pub locations: Vec<u64>,
    pub sequences: Vec<Sequence>,
}

/// Checks `model |= f`. Macros are expanded first.
pub fn check(model: &Model, f: &Formula, cfg: &CheckConfig) -> Result<Verdict3, CheckError> {
    let (v, _) = check_inner(model, f, cfg, false)?;
    Ok(v)
}

/// Like [`check`], also returning the satisfying choices recorded for
/// separating conjunctions and quantifier witnesses.
pub fn check_traced(
    model: &Model,
    f: &Formula,
    cfg: &CheckConfig,
) -> Result<(Verdict3, Vec<String>), CheckError> {
    check_inner(model, f, cfg, true)
}

/// `check_derived` is `expand_macros` followed by `check`; `check` already
/// expands, so this is an alias kept for discoverability.
pub fn check_derived(model: &Model, f: &Formula, cfg: &CheckConfig) -> Result<Verdict3, CheckError> {
    check(model, f, cfg)
}

/// Checks under explicit, caller-supplied candidate universes that are
/// treated as exhaustive: bounded quantifier scans are conclusive rather than
/// downgraded. Sound only when the caller's universes really do cover every
/// relevant witness.
pub fn check_closed(model: &Model, f: &Formula, universe: &Universe) -> Result<Verdict3, CheckError> {
    let f = expand_macros(f)?;
    let mut beta = 0u64;
    for n in model.all_naturals() {
        beta = beta.max(n);
    }
    for n in nat_constants(&f) {
        beta = beta.max(n);
    }
    for l in &universe.locations {
        beta = beta.max(*l);
    }
    for s in &universe.sequences {
        for v in s {
            if let Some(n) = v.as_loc() {
                beta = beta.max(n);
            }
        }
    }
    let mut checker = Checker {
        stack: &model.stack,
        seq: &model.seq,
        locs: universe.locations.iter().map(|l| Value::Nat(*l)).collect(),
        seq_universe: Some(Rc::new(universe.sequences.clone())),
        alphabet: Vec::new(),
        seq_len_bound: 0,
        exhaustive: true,
        beta_letter: beta + 1,
        trace: None,
        wand_cache: HashMap::new(),
    };
    checker.eval(&model.heap, &f)
}

fn check_inner(
    model: &Model,
    f: &Formula,
    cfg: &CheckConfig,
    traced: bool,
) -> Result<(Verdict3, Vec<String>), CheckError> {
    let f = expand_macros(f)?;

    let mut nats: BTreeSet<u64> = BTreeSet::new();
    nats.extend(model.all_naturals());
    nats.extend(nat_constants(&f));
    let max_nat = nats.iter().next_back().copied().unwrap_or(0);
    let loc_extra = cfg.loc_universe_extra.unwrap_or(size_bound(&f) as usize + 1);
    for i in 1..=loc_extra as u64 {
        nats.insert(max_nat + i);
    }

    let mut alphabet: Vec<Value> = model.occurring_values();
    for t in seq_terms(&f) {
        for leaf in t.flatten() {
            if let SeqLeaf::Ind(i) = leaf {
                if let Some(v) = i.const_value() {
                    alphabet.push(v);
                }
            }
        }
    }
    let fresh_base = max_nat + loc_extra as u64;
    for i in 1..=cfg.alphabet_extra as u64 {
        alphabet.push(Value::Nat(fresh_base + i));
    }
    alphabet.sort();
    alphabet.dedup();

    let beta_letter = fresh_base + cfg.alphabet_extra as u64 + 1;

    let mut checker = Checker {
        stack: &model.stack,
        seq: &model.seq,
        locs: nats.into_iter().map(Value::Nat).collect(),
        seq_universe: None,
        alphabet,
        seq_len_bound: cfg.seq_len_bound,
        exhaustive: false,
        beta_letter,
        trace: if traced { Some(Vec::new()) } else { None },
        wand_cache: HashMap::new(),
    };
    let v = checker.eval(&model.heap, &f)?;
    Ok((v, checker.trace.unwrap_or_default()))
}

fn and3(a: Verdict3, b: Verdict3) -> Verdict3 {
    match (a, b) {
        (Verdict3::False, _) | (_, Verdict3::False) => Verdict3::False,
        (Verdict3::Unknown(r), _) | (_, Verdict3::Unknown(r)) => Verdict3::Unknown(r),
        _ => Verdict3::True,
    }
}

fn not3(a: Verdict3) -> Verdict3 {
    match a {
        Verdict3::True => Verdict3::False,
        Verdict3::False => Verdict3::True,
        u => u,
    }
}

struct Checker<'a> {
    stack: &'a Stack,
    seq: &'a SeqAssignment,
    locs: Vec<Value>,
    /// Candidate sequences; built lazily from the alphabet unless supplied.
    seq_universe: Option<Rc<Vec<Sequence>>>,
    alphabet: Vec<Value>,
    seq_len_bound: usize,
    exhaustive: bool,
    beta_letter: u64,
    trace: Option<Vec<String>>,
    /// Wand verdicts per node and heap: quantifier instantiation
    /// substitutes into formulas, so subformulas not mentioning the bound
    /// variable are re-evaluated identically across candidates. Two levels
    /// keep lookups allocation-free.
    wand_cache: HashMap<Formula, HashMap<GroundHeap, Verdict3>>,
}

/// Wand enumerations over quantified operands larger than this bail out as
/// `Unknown` instead of enumerating (the enumeration is not conclusive for
/// them anyway).
const WAND_QUANTIFIED_CAP: u64 = 200_000;

impl<'a> Checker<'a> {
    fn note(&mut self, msg: impl FnOnce() -> String) {
        if let Some(t) = self.trace.as_mut() {
            t.push(msg());
        }
    }

    fn seq_candidates(&mut self) -> Rc<Vec<Sequence>> {
        if self.seq_universe.is_none() {
            let mut out: Vec<Sequence> = vec![vec![]];
            let mut layer: Vec<Sequence> = vec![vec![]];
            for _ in 0..self.seq_len_bound {
                let mut next = Vec::new();
                for s in &layer {
                    for v in &self.alphabet {
                        let mut e = s.clone();
                        e.push(*v);
                        next.push(e);
                    }
                }
                out.extend(next.iter().cloned());
                layer = next;
            }
            self.seq_universe = Some(Rc::new(out));
        }
        self.seq_universe.clone().unwrap()
    }

    fn eval(&mut self, h: &GroundHeap, f: &Formula) -> Result<Verdict3, CheckError> {
        match f {
            Formula::IndEq(a, b) => {
                let va = crate::model::eval_ind_term_env(self.stack, a)?;
                let vb = crate::model::eval_ind_term_env(self.stack, b)?;
                Ok(bool3(va == vb))
            }
            Formula::SeqEq(a, b) => {
                let va = crate::model::eval_seq_term_env(self.stack, self.seq, a)?;
                let vb = crate::model::eval_seq_term_env(self.stack, self.seq, b)?;
                Ok(bool3(va == vb))
            }
            Formula::True => Ok(Verdict3::True),
            Formula::False => Ok(Verdict3::False),
            Formula::Emp => Ok(bool3(h.0.is_empty())),
            Formula::PointsTo(t, s) => {
                let vt = crate::model::eval_ind_term_env(self.stack, t)?;
                let loc = match vt.as_loc() {
                    Some(l) => l,
                    None => return Ok(Verdict3::False),
                };
                let vs = crate::model::eval_seq_term_env(self.stack, self.seq, s)?;
                Ok(bool3(h.0.len() == 1 && h.0.get(&loc) == Some(&vs)))
            }
            Formula::Not(a) => Ok(not3(self.eval(h, a)?)),
            Formula::And(a, b) => {
                let va = self.eval(h, a)?;
                if va.is_false() {
                    return Ok(Verdict3::False);
                }
                Ok(and3(va, self.eval(h, b)?))
            }
            Formula::Or(a, b) => {
                let va = self.eval(h, a)?;
                if va.is_true() {
                    return Ok(Verdict3::True);
                }
                Ok(not3(and3(not3(va), not3(self.eval(h, b)?))))
            }
            Formula::Implies(a, b) => {
                let va = self.eval(h, a)?;
                if va.is_false() {
                    return Ok(Verdict3::True);
                }
                let vb = self.eval(h, b)?;
                Ok(match (va, vb) {
                    (_, Verdict3::True) => Verdict3::True,
                    (Verdict3::True, other) => other,
                    (Verdict3::Unknown(r), _) => Verdict3::Unknown(r),
                    (Verdict3::False, _) => unreachable!(),
                })
            }
            Formula::SepConj(..) => self.eval_sep(h, f),
            Formula::MagicWand(a, b) => {
                if let Some(v) = self.wand_cache.get(f).and_then(|per_heap| per_heap.get(h)) {
                    return Ok(v.clone());
                }
                let v = self.eval_wand(h, a, b)?;
                self.wand_cache
                    .entry(f.clone())
                    .or_default()
                    .insert(h.clone(), v.clone());
                Ok(v)
            }
            Formula::ExistsProg(x, body) => self.eval_exists_prog(h, x, body),
            Formula::ExistsSeq(a, body) => self.eval_exists_seq(h, a, body),
            Formula::Macro(m) => Err(MacroError::Unknown(m.name.clone()).into()),
        }
    }

    // -- separating conjunction ------------------------------------------

    fn eval_sep(&mut self, h: &GroundHeap, node: &Formula) -> Result<Verdict3, CheckError> {
        let mut ops = Vec::new();
        flatten_sep(node, &mut ops);

        let mut cells: Vec<(u64, Sequence)> = Vec::new();
        let mut pures: Vec<&Formula> = Vec::new();
        let mut others: Vec<&Formula> = Vec::new();
        let mut absorbers = 0usize;
        for op in &ops {
            match op {
                Formula::True => absorbers += 1,
                Formula::Emp => {}
                Formula::PointsTo(t, s) => {
                    let vt = crate::model::eval_ind_term_env(self.stack, t)?;
                    let loc = match vt.as_loc() {
                        Some(l) => l,
                        None => return Ok(Verdict3::False),
                    };
                    let vs = crate::model::eval_seq_term_env(self.stack, self.seq, s)?;
                    cells.push((loc, vs));
                }
                p if p.is_pure() => {
                    absorbers += 1;
                    pures.push(p);
                }
                other => others.push(other),
            }
        }

        if others.len() >= 2 {
            return self.eval_sep_splits(h, node);
        }

        // distinct cells, each present with the right content
        let mut locs: Vec<u64> = cells.iter().map(|(l, _)| *l).collect();
        locs.sort_unstable();
        let before = locs.len();
        locs.dedup();
        if locs.len() != before {
            return Ok(Verdict3::False);
        }
        for (l, content) in &cells {
            if h.0.get(l) != Some(content) {
                return Ok(Verdict3::False);
            }
        }

        let mut verdict = Verdict3::True;
        for p in pures {
            let v = self.eval(h, p)?;
            if v.is_false() {
                return Ok(Verdict3::False);
            }
            verdict = and3(verdict, v);
        }

        let leftover: GroundHeap = GroundHeap(
            h.0.iter()
                .filter(|(l, _)| !locs.contains(l))
                .map(|(l, c)| (*l, c.clone()))
                .collect(),
        );

        match others.first() {
            None => {
                if !leftover.0.is_empty() && absorbers == 0 {
                    return Ok(Verdict3::False);
                }
                if verdict.is_true() {
                    let cs: Vec<u64> = locs.clone();
                    self.note(|| format!("split: cells {cs:?} carry the points-to operands"));
                }
                Ok(verdict)
            }
            Some(rest) => {
                let inner = if absorbers > 0 {
                    self.eval_with_slack(&leftover, rest)?
                } else {
                    self.eval(&leftover, rest)?
                };
                Ok(and3(verdict, inner))
            }
        }
    }

    /// `f * true` on `h`. Quantifiers and disjunctions commute with the
    /// slack (`(exists x. p) * true == exists x. (p * true)`), which keeps
    /// the evaluation driven by cell analysis; anything else falls back to
    /// enumerating subheaps.
    fn eval_with_slack(&mut self, h: &GroundHeap, f: &Formula) -> Result<Verdict3, CheckError> {
        match f {
            Formula::ExistsProg(x, body) => self.eval(
                h,
                &Formula::ExistsProg(
                    x.clone(),
                    Box::new(Formula::sep(body.as_ref().clone(), Formula::True)),
                ),
            ),
            Formula::ExistsSeq(a, body) => self.eval(
                h,
                &Formula::ExistsSeq(
                    a.clone(),
                    Box::new(Formula::sep(body.as_ref().clone(), Formula::True)),
                ),
            ),
            Formula::Or(a, b) => {
                let va = self.eval_with_slack(h, a)?;
                if va.is_true() {
                    return Ok(Verdict3::True);
                }
                let vb = self.eval_with_slack(h, b)?;
                Ok(not3(and3(not3(va), not3(vb))))
            }
            Formula::SepConj(..) => self.eval(h, &Formula::sep(f.clone(), Formula::True)),
            other => {
                // some subheap must satisfy the operand
                let mut unknown = None;
                for (h1, _) in h.splits() {
                    match self.eval(&h1, other)? {
                        Verdict3::True => return Ok(Verdict3::True),
                        Verdict3::Unknown(r) => unknown = Some(r),
                        Verdict3::False => {}
                    }
                }
                Ok(match unknown {
                    Some(r) => Verdict3::Unknown(r),
                    None => Verdict3::False,
                })
            }
        }
    }

    fn eval_sep_splits(&mut self, h: &GroundHeap, node: &Formula) -> Result<Verdict3, CheckError> {
        let (a, b) = match node {
            Formula::SepConj(a, b) => (a, b),
            _ => unreachable!(),
        };
        let mut unknown = None;
        for (h1, h2) in h.splits() {
            let va = self.eval(&h1, a)?;
            if va.is_false() {
                continue;
            }
            let vb = self.eval(&h2, b)?;
            match and3(va, vb) {
                Verdict3::True => {
                    self.note(|| {
                        format!("split: {:?} | {:?} satisfies `{node}`", h1.domain(), h2.domain())
                    });
                    return Ok(Verdict3::True);
                }
                Verdict3::Unknown(r) => unknown = Some(r),
                Verdict3::False => {}
            }
        }
        Ok(match unknown {
            Some(r) => Verdict3::Unknown(r),
            None => Verdict3::False,
        })
    }

    // -- magic wand --------------------------------------------------------

    fn eval_wand(
        &mut self,
        h: &GroundHeap,
        a: &Formula,
        b: &Formula,
    ) -> Result<Verdict3, CheckError> {
        let mut fv = free_program_vars(a);
        fv.extend(free_program_vars(b));
        let mut base: BTreeSet<u64> = BTreeSet::new();
        for x in &fv {
            if let Some(l) = self.stack.get(x)?.as_loc() {
                base.insert(l);
            }
        }
        for f in [a, b] {
            base.extend(nat_constants(f));
        }

        // the first max(sz(a), sz(b)) locations outside dom(h) and the stack
        // image of the operands' free variables
        let fresh_needed = size_bound(a).max(size_bound(b));
        let mut fresh = Vec::new();
        let mut candidate = 1u64;
        while (fresh.len() as u64) < fresh_needed {
            if !h.0.contains_key(&candidate) && !base.contains(&candidate) {
                fresh.push(candidate);
            }
            candidate += 1;
        }
        let mut domain: Vec<u64> = base
            .iter()
            .copied()
            .filter(|l| !h.0.contains_key(l))
            .chain(fresh)
            .collect();
        domain.sort_unstable();
        domain.dedup();

        // cell contents: values of the operands' sequence terms, the empty
        // sequence, and one sequence guaranteed fresh (a single letter larger
        // than every occurring natural)
        let mut range: Vec<Sequence> = Vec::new();
        let mut terms = seq_terms(a);
        terms.extend(seq_terms(b));
        for t in terms {
            // terms mentioning operand-internal bound variables do not
            // evaluate; those operands downgrade below anyway
            if let Ok(v) = crate::model::eval_seq_term_env(self.stack, self.seq, &t) {
                range.push(v);
            }
        }
        range.push(Vec::new());
        range.push(vec![Value::Nat(self.beta_letter)]);
        range.sort();
        range.dedup();

        let quantified = a.contains_quantifier() || b.contains_quantifier();

        // Antecedents that are separating lists of cells determine their
        // satisfying extensions directly: the required cells are forced, and
        // only the slack (when some operand absorbs one) ranges over the
        // candidate sets. This skips the blind enumeration entirely, and an
        // unsatisfiable antecedent makes the wand hold vacuously and exactly.
        match self.wand_antecedent_extensions(h, a, &domain, &range)? {
            AnteExtensions::Vacuous => return Ok(Verdict3::True),
            AnteExtensions::Forced(extensions) => {
                let mut unknown = None;
                for h1 in extensions {
                    let combined =
                        h.union_disjoint(&h1).expect("domains disjoint by construction");
                    match self.eval(&combined, b)? {
                        Verdict3::True => {}
                        Verdict3::False => {
                            self.note(|| format!("wand countercase: extension {:?}", h1.domain()));
                            return Ok(Verdict3::False);
                        }
                        Verdict3::Unknown(r) => unknown = Some(r),
                    }
                }
                if let Some(r) = unknown {
                    return Ok(Verdict3::Unknown(r));
                }
                if quantified {
                    return Ok(Verdict3::Unknown(
                        "wand operands contain quantifiers; candidate heaps may be incomplete"
                            .into(),
                    ));
                }
                return Ok(Verdict3::True);
            }
            AnteExtensions::Generic => {}
        }

        let heap_count = ((range.len() as u64) + 1)
            .checked_pow(domain.len() as u32)
            .unwrap_or(u64::MAX);
        if quantified && heap_count > WAND_QUANTIFIED_CAP {
            return Ok(Verdict3::Unknown(
                "wand with quantified operands has too many candidate heaps".into(),
            ));
        }

        let mut unknown = None;
        let n = domain.len();
        for mask in 0u64..(1 << n) {
            let members: Vec<u64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| domain[i]).collect();
            let k = members.len();
            let mut indices = vec![0usize; k];
            loop {
                let mut h1 = GroundHeap::new();
                for (i, l) in members.iter().enumerate() {
                    h1 = h1.insert(*l, range[indices[i]].clone());
                }
                let va = self.eval(&h1, a)?;
                if !va.is_false() {
                    let combined = h.union_disjoint(&h1).expect("domains disjoint by construction");
                    let vb = self.eval(&combined, b)?;
                    match (va, vb) {
                        (_, Verdict3::True) => {}
                        (Verdict3::True, Verdict3::False) => {
                            self.note(|| {
                                format!("wand countercase: extension {:?}", h1.domain())
                            });
                            return Ok(Verdict3::False);
                        }
                        (_, Verdict3::Unknown(r)) | (Verdict3::Unknown(r), Verdict3::False) => {
                            unknown = Some(r);
                        }
                        (Verdict3::False, _) => unreachable!(),
                    }
                }
                // next content tuple
                let mut pos = 0;
                loop {
                    if pos == k {
                        break;
                    }
                    indices[pos] += 1;
                    if indices[pos] < range.len() {
                        break;
                    }
                    indices[pos] = 0;
                    pos += 1;
                }
                if pos == k {
                    break;
                }
            }
        }

        if let Some(r) = unknown {
            return Ok(Verdict3::Unknown(r));
        }
        if quantified {
            return Ok(Verdict3::Unknown(
                "wand operands contain quantifiers; candidate heaps may be incomplete".into(),
            ));
        }
        Ok(Verdict3::True)
    }

    /// Computes the candidate extension heaps satisfying the wand's
    /// antecedent, when the antecedent is a separating list of cells, pure
    /// parts, `emp` and `true`.
    fn wand_antecedent_extensions(
        &mut self,
        h: &GroundHeap,
        a: &Formula,
        domain: &[u64],
        range: &[Sequence],
    ) -> Result<AnteExtensions, CheckError> {
        let mut ops = Vec::new();
        flatten_sep(a, &mut ops);
        let mut cells: Vec<(u64, Sequence)> = Vec::new();
        let mut absorbing = false;
        for op in &ops {
            match op {
                Formula::True => absorbing = true,
                Formula::Emp => {}
                Formula::PointsTo(t, s) => {
                    let vt = crate::model::eval_ind_term_env(self.stack, t)?;
                    let loc = match vt.as_loc() {
                        Some(l) => l,
                        None => return Ok(AnteExtensions::Vacuous),
                    };
                    let vs = crate::model::eval_seq_term_env(self.stack, self.seq, s)?;
                    cells.push((loc, vs));
                }
                p if p.is_pure() => match self.eval(h, p)? {
                    Verdict3::False => return Ok(AnteExtensions::Vacuous),
                    Verdict3::True => absorbing = true,
                    Verdict3::Unknown(_) => return Ok(AnteExtensions::Generic),
                },
                _ => return Ok(AnteExtensions::Generic),
            }
        }

        // duplicate locations cannot live in disjoint subheaps, and occupied
        // ones cannot extend the heap
        let mut locs: Vec<u64> = cells.iter().map(|(l, _)| *l).collect();
        locs.sort_unstable();
        let before = locs.len();
        locs.dedup();
        if locs.len() != before || locs.iter().any(|l| h.0.contains_key(l)) {
            return Ok(AnteExtensions::Vacuous);
        }
        let mut base = GroundHeap::new();
        for (l, c) in cells {
            base.0.insert(l, c);
        }

        if !absorbing {
            return Ok(AnteExtensions::Forced(vec![base]));
        }
        // slack cells range over the remaining candidate locations/contents
        let slack_locs: Vec<u64> =
            domain.iter().copied().filter(|l| !base.0.contains_key(l)).collect();
        let mut out = Vec::new();
        let n = slack_locs.len();
        for mask in 0u64..(1 << n) {
            let members: Vec<u64> =
                (0..n).filter(|i| mask & (1 << i) != 0).map(|i| slack_locs[i]).collect();
            let k = members.len();
            let mut indices = vec![0usize; k];
            loop {
                let mut h1 = base.clone();
                for (i, l) in members.iter().enumerate() {
                    h1.0.insert(*l, range[indices[i]].clone());
                }
                out.push(h1);
                let mut pos = 0;
                loop {
                    if pos == k {
                        break;
                    }
                    indices[pos] += 1;
                    if indices[pos] < range.len() {
                        break;
                    }
                    indices[pos] = 0;
                    pos += 1;
                }
                if pos == k {
                    break;
                }
            }
        }
        Ok(AnteExtensions::Forced(out))
    }

    // -- quantifiers -------------------------------------------------------

    fn eval_exists_prog(
        &mut self,
        h: &GroundHeap,
        x: &ProgVar,
        body: &Formula,
    ) -> Result<Verdict3, CheckError> {
        let pinned = self.pin_prog(h, body, x, true);
        let candidates: Vec<Value> = match &pinned {
            Some(set) => set.iter().copied().collect(),
            None => self.locs.clone(),
        };
        let mut unknown = None;
        for v in candidates {
            if v.is_atom() {
                continue; // quantified program variables range over naturals
            }
            let inst = subst_prog(body, x, &IndTerm::from(v));
            match self.eval(h, &inst)? {
                Verdict3::True => {
                    self.note(|| format!("witness: {x} = {v}"));
                    return Ok(Verdict3::True);
                }
                Verdict3::Unknown(r) => unknown = Some(r),
                Verdict3::False => {}
            }
        }
        if let Some(r) = unknown {
            return Ok(Verdict3::Unknown(r));
        }
        if pinned.is_some() || self.exhaustive {
            Ok(Verdict3::False)
        } else {
            Ok(Verdict3::Unknown(format!(
                "no witness for `exists {x}` among bounded location candidates"
            )))
        }
    }

    fn eval_exists_seq(
        &mut self,
        h: &GroundHeap,
        a: &SeqVar,
        body: &Formula,
    ) -> Result<Verdict3, CheckError> {
        let pinned = self.pin_seq(h, body, a, true);
        let candidates: Rc<Vec<Sequence>> = match &pinned {
            Some(set) => Rc::new(set.iter().cloned().collect()),
            None => self.seq_candidates(),
        };
        let mut unknown = None;
        for s in candidates.iter() {
            let inst = subst_seq(body, a, &SeqTerm::from_values(s));
            match self.eval(h, &inst)? {
                Verdict3::True => {
                    self.note(|| format!("witness: {a} = {}", crate::value::display_sequence(s)));
                    return Ok(Verdict3::True);
                }
                Verdict3::Unknown(r) => unknown = Some(r),
                Verdict3::False => {}
            }
        }
        if let Some(r) = unknown {
            return Ok(Verdict3::Unknown(r));
        }
        if pinned.is_some() || self.exhaustive {
            Ok(Verdict3::False)
        } else {
            Ok(Verdict3::Unknown(format!(
                "no witness for `exists {a}` among bounded sequence candidates"
            )))
        }
    }

    // -- witness pinning ----------------------------------------------------
    //
    // Scans the positively-required part of a quantifier body for atoms that
    // bound the possible witnesses: an equality against a ground term, or a
    // points-to whose pattern can be matched against a known cell. The
    // returned candidate set is a superset of all true witnesses, so a failed
    // scan over it is conclusive.

    /// Candidate pins for one side of a disjunctive split (`a \/ b`,
    /// `!(a /\ b)`, `a => b`): a side that does not mention the target can
    /// be evaluated outright — if its literal is false it contributes no
    /// witnesses, and if it may hold every candidate would, so no pin
    /// exists. `Some(None)` means "contributes nothing".
    fn disjunct_side_pins<P>(
        &mut self,
        h: &GroundHeap,
        side: &Formula,
        positive: bool,
        mentions: bool,
        scan: impl Fn(&mut Self, &GroundHeap, &Formula, bool) -> Option<P>,
    ) -> Option<Option<P>> {
        if mentions {
            return scan(self, h, side, positive).map(Some);
        }
        match self.eval(h, side) {
            Ok(v) => {
                let literal = if positive { v } else { not3(v) };
                if literal.is_false() {
                    Some(None)
                } else {
                    None
                }
            }
            // mentions other still-unbound variables; stay conservative
            Err(_) => None,
        }
    }

    fn pin_prog(
        &mut self,
        h: &GroundHeap,
        f: &Formula,
        x: &ProgVar,
        positive: bool,
    ) -> Option<BTreeSet<Value>> {
        let mentions = |g: &Formula, x: &ProgVar| free_program_vars(g).contains(x);
        match (f, positive) {
            (Formula::Not(g), _) => self.pin_prog(h, g, x, !positive),
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => self
                .pin_prog(h, a, x, positive)
                .or_else(|| self.pin_prog(h, b, x, positive)),
            (Formula::SepConj(a, b), true) => self
                .pin_prog(h, a, x, true)
                .or_else(|| self.pin_prog(h, b, x, true)),
            (Formula::And(a, b), false) | (Formula::Or(a, b), true) => {
                let pol = positive;
                let pa = self.disjunct_side_pins(h, a, pol, mentions(a, x), |s, h, f, p| {
                    s.pin_prog(h, f, x, p)
                })?;
                let pb = self.disjunct_side_pins(h, b, pol, mentions(b, x), |s, h, f, p| {
                    s.pin_prog(h, f, x, p)
                })?;
                Some(pa.unwrap_or_default().into_iter().chain(pb.unwrap_or_default()).collect())
            }
            (Formula::Implies(a, b), true) => {
                let pa = self.disjunct_side_pins(h, a, false, mentions(a, x), |s, h, f, p| {
                    s.pin_prog(h, f, x, p)
                })?;
                let pb = self.disjunct_side_pins(h, b, true, mentions(b, x), |s, h, f, p| {
                    s.pin_prog(h, f, x, p)
                })?;
                Some(pa.unwrap_or_default().into_iter().chain(pb.unwrap_or_default()).collect())
            }
            (Formula::Implies(a, b), false) => self
                .pin_prog(h, a, x, true)
                .or_else(|| self.pin_prog(h, b, x, false)),
            (Formula::ExistsProg(y, body), _) if y != x => self.pin_prog(h, body, x, positive),
            (Formula::ExistsSeq(_, body), _) => self.pin_prog(h, body, x, positive),
            (Formula::IndEq(a, b), true) => {
                for (lhs, rhs) in [(a, b), (b, a)] {
                    if lhs == &IndTerm::Var(x.clone()) && !mentions_prog(rhs, x) {
                        if let Ok(v) = crate::model::eval_ind_term_env(self.stack, rhs) {
                            return Some(if v.is_atom() {
                                BTreeSet::new()
                            } else {
                                BTreeSet::from([v])
                            });
                        }
                    }
                }
                None
            }
            (Formula::SeqEq(a, b), true) => {
                for (pat, ground) in [(a, b), (b, a)] {
                    if let Some(set) = self.pin_from_pattern(pat, ground, &Target::Prog(x)) {
                        return Some(set.into_prog());
                    }
                }
                None
            }
            (Formula::PointsTo(t, s), true) => {
                self.pin_from_cell(h, t, s, &Target::Prog(x)).map(PinSet::into_prog)
            }
            _ => None,
        }
    }

    fn pin_seq(
        &mut self,
        h: &GroundHeap,
        f: &Formula,
        a: &SeqVar,
        positive: bool,
    ) -> Option<BTreeSet<Sequence>> {
        let mentions = |g: &Formula, a: &SeqVar| crate::formula::free_seq_vars(g).contains(a);
        match (f, positive) {
            (Formula::Not(g), _) => self.pin_seq(h, g, a, !positive),
            (Formula::And(l, r), true) | (Formula::Or(l, r), false) => self
                .pin_seq(h, l, a, positive)
                .or_else(|| self.pin_seq(h, r, a, positive)),
            (Formula::SepConj(l, r), true) => self
                .pin_seq(h, l, a, true)
                .or_else(|| self.pin_seq(h, r, a, true)),
            (Formula::And(l, r), false) | (Formula::Or(l, r), true) => {
                let pol = positive;
                let pl = self.disjunct_side_pins(h, l, pol, mentions(l, a), |s, h, f, p| {
                    s.pin_seq(h, f, a, p)
                })?;
                let pr = self.disjunct_side_pins(h, r, pol, mentions(r, a), |s, h, f, p| {
                    s.pin_seq(h, f, a, p)
                })?;
                Some(pl.unwrap_or_default().into_iter().chain(pr.unwrap_or_default()).collect())
            }
            (Formula::Implies(l, r), true) => {
                let pl = self.disjunct_side_pins(h, l, false, mentions(l, a), |s, h, f, p| {
                    s.pin_seq(h, f, a, p)
                })?;
                let pr = self.disjunct_side_pins(h, r, true, mentions(r, a), |s, h, f, p| {
                    s.pin_seq(h, f, a, p)
                })?;
                Some(pl.unwrap_or_default().into_iter().chain(pr.unwrap_or_default()).collect())
            }
            (Formula::Implies(l, r), false) => self
                .pin_seq(h, l, a, true)
                .or_else(|| self.pin_seq(h, r, a, false)),
            (Formula::ExistsSeq(b, body), _) if b != a => self.pin_seq(h, body, a, positive),
            (Formula::ExistsProg(_, body), _) => self.pin_seq(h, body, a, positive),
            (Formula::SeqEq(l, r), true) => {
                for (pat, ground) in [(l, r), (r, l)] {
                    if let Some(set) = self.pin_from_pattern(pat, ground, &Target::Seq(a)) {
                        return Some(set.into_seq());
                    }
                }
                None
            }
            (Formula::PointsTo(t, s), true) => {
                self.pin_from_cell(h, t, s, &Target::Seq(a)).map(PinSet::into_seq)
            }
            _ => None,
        }
    }

    /// Pin from `pattern == ground`: evaluates `ground` and matches.
    fn pin_from_pattern(&self, pattern: &SeqTerm, ground: &SeqTerm, target: &Target) -> Option<PinSet> {
        if !target_occurs(pattern, target) || target_occurs(ground, target) {
            return None;
        }
        let value = crate::model::eval_seq_term_env(self.stack, self.seq, ground).ok()?;
        self.match_pattern(pattern, &value, target)
    }

    /// Pin from `t |-> pattern`: the cell for `t` (if any) must match.
    fn pin_from_cell(
        &self,
        h: &GroundHeap,
        t: &IndTerm,
        s: &SeqTerm,
        target: &Target,
    ) -> Option<PinSet> {
        // the location variable itself: any allocated location
        if let Target::Prog(x) = target {
            if t == &IndTerm::Var((*x).clone()) {
                return Some(PinSet::Prog(
                    h.0.keys().map(|l| Value::Nat(*l)).collect(),
                ));
            }
        }
        if !target_occurs(s, target) {
            return None;
        }
        let loc = crate::model::eval_ind_term_env(self.stack, t).ok()?;
        let cell = match loc.as_loc().and_then(|l| h.0.get(&l)) {
            Some(c) => c.clone(),
            // the atom requires an allocated cell; no cell means no witness
            // can satisfy it
            None => return Some(PinSet::empty(target)),
        };
        self.match_pattern(s, &cell, target)
    }

    fn match_pattern(&self, pattern: &SeqTerm, value: &[Value], target: &Target) -> Option<PinSet> {
        #[derive(Clone)]
        enum Pat {
            Ground(Vec<Value>),
            TargetInd,
            TargetSeq,
            WildInd,
            WildSeq,
        }
        let mut pats = Vec::new();
        for leaf in pattern.flatten() {
            match leaf {
                SeqLeaf::Ind(t) => {
                    let is_target = matches!(target, Target::Prog(x) if t == IndTerm::Var((*x).clone()));
                    if is_target {
                        pats.push(Pat::TargetInd);
                    } else if let Ok(v) = crate::model::eval_ind_term_env(self.stack, &t) {
                        pats.push(Pat::Ground(vec![v]));
                    } else {
                        pats.push(Pat::WildInd);
                    }
                }
                SeqLeaf::Var(a) => {
                    let is_target = matches!(target, Target::Seq(b) if &a == *b);
                    if is_target {
                        pats.push(Pat::TargetSeq);
                    } else if let Ok(v) = self.seq.get(&a) {
                        pats.push(Pat::Ground(v.clone()));
                    } else {
                        pats.push(Pat::WildSeq);
                    }
                }
            }
        }

        enum Binding {
            Ind(Value),
            Seq(Sequence),
        }
        fn go(
            pats: &[Pat],
            value: &[Value],
            pi: usize,
            vi: usize,
            bound: &mut Option<Binding>,
            prog_target: bool,
            out: &mut PinSet,
        ) {
            if pi == pats.len() {
                if vi == value.len() {
                    match bound {
                        Some(Binding::Ind(v)) => out.insert_ind(*v),
                        Some(Binding::Seq(s)) => out.insert_seq(s.clone()),
                        None => {}
                    }
                }
                return;
            }
            match &pats[pi] {
                Pat::Ground(vs) => {
                    if value[vi..].starts_with(vs) {
                        go(pats, value, pi + 1, vi + vs.len(), bound, prog_target, out);
                    }
                }
                Pat::WildInd => {
                    if vi < value.len() {
                        go(pats, value, pi + 1, vi + 1, bound, prog_target, out);
                    }
                }
                Pat::WildSeq => {
                    for k in 0..=(value.len() - vi) {
                        go(pats, value, pi + 1, vi + k, bound, prog_target, out);
                    }
                }
                Pat::TargetInd => {
                    if vi < value.len() {
                        let v = value[vi];
                        if prog_target && v.is_atom() {
                            return;
                        }
                        match bound {
                            Some(Binding::Ind(b)) if *b != v => {}
                            Some(Binding::Ind(_)) => {
                                go(pats, value, pi + 1, vi + 1, bound, prog_target, out)
                            }
                            _ => {
                                let mut nb = Some(Binding::Ind(v));
                                go(pats, value, pi + 1, vi + 1, &mut nb, prog_target, out);
                            }
                        }
                    }
                }
                Pat::TargetSeq => {
                    for k in 0..=(value.len() - vi) {
                        let cand = value[vi..vi + k].to_vec();
                        match bound {
                            Some(Binding::Seq(b)) if *b != cand => continue,
                            Some(Binding::Seq(_)) => {
                                go(pats, value, pi + 1, vi + k, bound, prog_target, out)
                            }
                            _ => {
                                let mut nb = Some(Binding::Seq(cand));
                                go(pats, value, pi + 1, vi + k, &mut nb, prog_target, out);
                            }
                        }
                    }
                }
            }
        }

        let mut out = PinSet::empty(target);
        let mut bound = None;
        go(
            &pats,
            value,
            0,
            0,
            &mut bound,
            matches!(target, Target::Prog(_)),
            &mut out,
        );
        Some(out)
    }
}

enum AnteExtensions {
    /// No extension satisfies the antecedent; the wand holds vacuously.
    Vacuous,
    /// Exactly these candidate extensions satisfy it.
    Forced(Vec<GroundHeap>),
    /// The antecedent is not a separating cell list; enumerate blindly.
    Generic,
}

enum Target<'a> {
    Prog(&'a ProgVar),
    Seq(&'a SeqVar),
}

enum PinSet {
    Prog(BTreeSet<Value>),
    Seq(BTreeSet<Sequence>),
}

impl PinSet {
    fn empty(target: &Target) -> PinSet {
        match target {
            Target::Prog(_) => PinSet::Prog(BTreeSet::new()),
            Target::Seq(_) => PinSet::Seq(BTreeSet::new()),
        }
    }
    fn insert_ind(&mut self, v: Value) {
        if let PinSet::Prog(s) = self {
            s.insert(v);
        }
    }
    fn insert_seq(&mut self, v: Sequence) {
        if let PinSet::Seq(s) = self {
            s.insert(v);
        }
    }
    fn into_prog(self) -> BTreeSet<Value> {
        match self {
            PinSet::Prog(s) => s,
            PinSet::Seq(_) => BTreeSet::new(),
        }
    }
    fn into_seq(self) -> BTreeSet<Sequence> {
        match self {
            PinSet::Seq(s) => s,
            PinSet::Prog(_) => BTreeSet::new(),
        }
    }
}

fn bool3(b: bool) -> Verdict3 {
    if b {
        Verdict3::True
    } else {
        Verdict3::False
    }
}

fn flatten_sep<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::SepConj(a, b) => {
            flatten_sep(a, out);
            flatten_sep(b, out);
        }
        other => out.push(other),
    }
}

fn mentions_prog(t: &IndTerm, x: &ProgVar) -> bool {
    matches!(t, IndTerm::Var(y) if y == x)
}

fn target_occurs(s: &SeqTerm, target: &Target) -> bool {
    for leaf in s.flatten() {
        match (&leaf, target) {
            (SeqLeaf::Ind(IndTerm::Var(y)), Target::Prog(x)) if &y == x => return true,
            (SeqLeaf::Var(a), Target::Seq(b)) if *a == **b => return true,
            _ => {}
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;
    use crate::value::Value::*;

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    fn chk(model: &Model, text: &str) -> Verdict3 {
        check(model, &parse_formula(text).unwrap(), &cfg()).unwrap()
    }

    fn empty_model() -> Model {
        Model::default()
    }

    #[test]
    fn emp_on_empty_heap() {
        assert!(chk(&empty_model(), "emp").is_true());
        let m = Model {
            heap: GroundHeap::new().insert(1, vec![Nat(2)]),
            ..Model::default()
        };
        assert!(chk(&m, "emp").is_false());
    }

    #[test]
    fn points_to_forces_the_sequence() {
        // s(x1)=1, s(x3)=3, s_a(a1)=[1], h={1:[1,3]}: x1 |-> a1 ^ x3
        let m = Model {
            stack: Stack::new().bind("x1", Nat(1)).bind("x3", Nat(3)),
            seq: SeqAssignment::new().bind("a1", vec![Nat(1)]),
            heap: GroundHeap::new().insert(1, vec![Nat(1), Nat(3)]),
        };
        assert!(chk(&m, "x1 |-> @a1 ^ x3").is_true());
        // the forced value is unique
        let wrong = Model {
            seq: SeqAssignment::new().bind("a1", vec![Nat(3)]),
            ..m.clone()
        };
        assert!(chk(&wrong, "x1 |-> @a1 ^ x3").is_false());
        // atoms are never locations
        assert!(chk(&m, "nil |-> eps").is_false());
    }

    #[test]
    fn wand_on_empty_heap() {
        assert!(chk(&empty_model(), "emp -* emp").is_true());
    }

    #[test]
    fn wand_needs_x_bound() {
        let m = Model {
            stack: Stack::new().bind("x", Nat(1)),
            ..Model::default()
        };
        // h' = {1: [nil]} satisfies the antecedent, and then emp fails
        assert!(chk(&m, "(x |-> nil) -* emp").is_false());
        // allocation: with x's cell present no disjoint antecedent heap
        // exists, so the wand holds vacuously
        let allocated = Model {
            stack: Stack::new().bind("x", Nat(1)),
            heap: GroundHeap::new().insert(1, vec![Nat(2)]),
            ..Model::default()
        };
        assert!(chk(&allocated, "(x |-> nil) -* false").is_true());
        assert!(chk(&m, "(x |-> nil) -* false").is_false());
    }

    #[test]
    fn separating_conjunction_splits() {
        let m = Model {
            stack: Stack::new().bind("x", Nat(1)).bind("y", Nat(2)),
            seq: SeqAssignment::new(),
            heap: GroundHeap::new()
                .insert(1, vec![Nat(2)])
                .insert(2, vec![Nat(1)]),
        };
        assert!(chk(&m, "x |-> 2 * y |-> 1").is_true());
        assert!(chk(&m, "x |-> 2 * x |-> 2").is_false());
        assert!(chk(&m, "x |-> 2 * true").is_true());
        assert!(chk(&m, "x |-> 2").is_false()); // strict singleton
    }

    #[test]
    fn quantifiers_with_pinned_witnesses_are_exact() {
        let m = Model {
            stack: Stack::new().bind("x", Nat(1)),
            seq: SeqAssignment::new(),
            heap: GroundHeap::new().insert(1, vec![Nat(2), Hash, Nat(5)]),
        };
        // alloc via the derived form
        assert!(chk(&m, "alloc(x)").is_true());
        assert!(chk(&m, "exists @a. x |-> @a").is_true());
        // the cell content is pinned, so failure is definitive
        assert!(chk(&m, "exists @a. x |-> @a ^ #").is_false());
        // pinned program variable witness
        assert!(chk(&m, "exists y. x |-> y ^ # ^ 5").is_true());
    }

    #[test]
    fn outdeg_and_reach_examples() {
        // 1-cell heap {1: [2,#,5]}, s(x)=1: out-degree 1
        let m = Model {
            stack: Stack::new().bind("x", Nat(1)),
            seq: SeqAssignment::new(),
            heap: GroundHeap::new().insert(1, vec![Nat(2), Hash, Nat(5)]),
        };
        assert!(chk(&m, "Outdeg(x, 1)").is_true());
        assert!(chk(&m, "Outdeg(x, 0)").is_false());
        assert!(chk(&m, "Outdeg(x, 2)").is_false());
        assert!(chk(&m, "reachn(x, x, 0)").is_true());

        // 2-cell chain {1: [2,#], 2: [#]}: one step from x to y
        let chain = Model {
            stack: Stack::new().bind("x", Nat(1)).bind("y", Nat(2)),
            seq: SeqAssignment::new(),
            heap: GroundHeap::new()
                .insert(1, vec![Nat(2), Hash])
                .insert(2, vec![Hash]),
        };
        assert!(chk(&chain, "reachn(x, y, 1)").is_true());
        assert!(chk(&chain, "reachn(y, x, 1)").is_false());
        assert!(chk(&chain, "reach(x, y, 4)").is_true());
    }

    #[test]
    fn two_tier_layout() {
        let m = Model {
            stack: Stack::new().bind("x", Nat(10)),
            seq: SeqAssignment::new().bind("l", vec![Nat(11), Nat(12)]),
            heap: GroundHeap::new()
                .insert(10, vec![Nat(11), Nat(12), Hash])
                .insert(11, vec![Hash, Nat(5)])
                .insert(12, vec![Hash, Nat(6)]),
        };
        assert!(chk(&m, "two_tier(x, @l)").is_true());
        // an entry whose cell does not have the second-tier form
        let mut bad = m.clone();
        bad.heap.0.insert(12, vec![Nat(7), Hash]);
        assert!(chk(&bad, "two_tier(x, @l)").is_false());
    }

    #[test]
    fn septraction_duality_on_examples() {
        let models = [
            empty_model(),
            Model {
                stack: Stack::new().bind("x", Nat(1)).bind("y", Nat(2)),
                seq: SeqAssignment::new().bind("a", vec![Nat(1)]),
                heap: GroundHeap::new().insert(1, vec![Nat(2)]),
            },
        ];
        let pairs = [
            ("emp -o emp", "!(emp -* !emp)"),
            ("(x |-> nil) -o true", "!((x |-> nil) -* !true)"),
            ("(x |-> @a) -o (y |-> @a * x |-> @a)", "!((x |-> @a) -* !(y |-> @a * x |-> @a))"),
        ];
        for m in &models {
            for (lhs, rhs) in &pairs {
                if m.stack.0.is_empty() && lhs.contains('x') {
                    continue;
                }
                assert_eq!(chk(m, lhs), chk(m, rhs), "duality differs for {lhs}");
            }
        }
    }

    #[test]
    fn bounded_existential_downgrades_without_pins() {
        // exists x. !(x = y): no positive atom pins x; the bounded scan
        // succeeds here (any fresh location differs from y)
        let m = Model {
            stack: Stack::new().bind("y", Nat(1)),
            ..Model::default()
        };
        assert!(chk(&m, "exists x. !(x = y)").is_true());
        // a universal that holds under the bound is not certified
        let v = chk(&m, "forall x. x = y");
        assert!(v.is_false() || v.is_unknown());
        assert!(!v.is_true());
    }

    #[test]
    fn closed_checking_is_conclusive() {
        let m = Model {
            stack: Stack::new().bind("y", Nat(1)),
            ..Model::default()
        };
        let universe = Universe { locations: vec![1], sequences: vec![vec![]] };
        let f = parse_formula("forall x. x = y").unwrap();
        // within the closed universe {1} every x equals y
        assert!(check_closed(&m, &f, &universe).unwrap().is_true());
    }
}
