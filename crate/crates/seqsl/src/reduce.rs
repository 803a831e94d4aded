//! The decision pipeline for the propositional fragment: reduction of
//! `(stack, heap, formula)` to a word formula, satisfiability given a stack,
//! and full satisfiability via stack enumeration, plus validity for
//! universally-prefixed formulas.
//!
//! The reduction follows the connective structure: equalities pass through
//! with individual terms evaluated to letters, `emp` and the domain facts of
//! `|->` become ground truth values, `*` becomes the disjunction over heap
//! splits, and `-*` becomes the conjunction over candidate extension heaps
//! whose domain comes from the size bound and whose cells carry sequence
//! *terms* (so freshness of the reserved sequence becomes disequalities,
//! solved along with everything else).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::{
    ensure_pseqsl, formula_size, free_program_vars, free_seq_vars, nat_constants, seq_terms,
    Formula, FormulaError,
};
use crate::classify::{classify, prenex, ClassifyError, Shape};
use crate::model::{
    disjoint_union, heap_splits, GroundHeap, Model, ModelError, SeqAssignment, Stack, SymbolicHeap,
};
use crate::semantics::{check, CheckConfig, CheckError};
use crate::term::{SeqLeaf, SeqTerm, SeqVar};
use crate::value::Value;
use crate::wordeq::{
    solve, Alphabet, SolveConfig, SolverVerdict, Substitution, WordFormula, WordSym, WordTerm,
};

#[derive(Debug, Error)]
pub enum DecideError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("reduction exceeds the node budget")]
    TooLarge,
    #[error("wrong fragment: {0}")]
    WrongFragment(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

#[derive(Debug, Clone)]
pub struct DecideConfig {
    pub solve: SolveConfig,
    /// Budget on the reduction output size; blow-ups become Unknown.
    pub reduce_max_nodes: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig { solve: SolveConfig::default(), reduce_max_nodes: 400_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatVerdict {
    Sat(Model),
    Unsat,
    Unknown(String),
}

impl SatVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatVerdict::Sat(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidityVerdict {
    Valid,
    Invalid(Model),
    Unknown(String),
}

/// The output of the reduction: the word formula (core conjoined with the
/// freshness disequalities for the reserved sequence variable).
#[derive(Debug, Clone)]
pub struct Reduction {
    pub formula: WordFormula,
    pub core: WordFormula,
    pub side_constraints: WordFormula,
    pub beta: SeqVar,
}

struct Ctx<'a> {
    stack: &'a Stack,
    beta: SeqVar,
    nodes: usize,
    max_nodes: usize,
    wand_seen: bool,
}

impl<'a> Ctx<'a> {
    fn spend(&mut self, n: usize) -> Result<(), DecideError> {
        self.nodes += n;
        if self.nodes > self.max_nodes {
            Err(DecideError::TooLarge)
        } else {
            Ok(())
        }
    }
}

/// Reduces `(stack, heap, formula)` to a word formula that is satisfiable
/// (over the instance alphabet) exactly when some sequence assignment makes
/// the formula hold.
pub fn reduce(stack: &Stack, heap: &SymbolicHeap, f: &Formula) -> Result<Reduction, DecideError> {
    reduce_with(stack, heap, f, &DecideConfig::default())
}

pub fn reduce_with(
    stack: &Stack,
    heap: &SymbolicHeap,
    f: &Formula,
    cfg: &DecideConfig,
) -> Result<Reduction, DecideError> {
    let desugared = crate::macros::expand_macros(f)
        .map_err(CheckError::from)?
        .desugar();
    ensure_pseqsl(&desugared)?;

    let mut used: BTreeSet<String> = free_seq_vars(&desugared).into_iter().map(|v| v.0).collect();
    for cell in heap.0.values() {
        for v in cell.seq_vars() {
            used.insert(v.0);
        }
    }
    let beta = SeqVar::new(crate::formula::fresh_name("b", &mut used));

    let mut ctx = Ctx {
        stack,
        beta: beta.clone(),
        nodes: 0,
        max_nodes: cfg.reduce_max_nodes,
        wand_seen: false,
    };
    let core = translate(&mut ctx, heap, &desugared)?;

    let side_constraints = if ctx.wand_seen {
        let beta_term: WordTerm = vec![WordSym::Var(beta.clone())];
        WordFormula::and_all(
            seq_terms(&desugared)
                .iter()
                .map(|t| {
                    convert_term(stack, t).map(|wt| {
                        WordFormula::not(WordFormula::eq(beta_term.clone(), wt))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        WordFormula::TrueF
    };

    let formula = WordFormula::and(core.clone(), side_constraints.clone());
    Ok(Reduction { formula, core, side_constraints, beta })
}

fn convert_term(stack: &Stack, t: &SeqTerm) -> Result<WordTerm, DecideError> {
    let mut out = Vec::new();
    for leaf in t.flatten() {
        match leaf {
            SeqLeaf::Ind(i) => {
                out.push(WordSym::Letter(crate::model::eval_ind_term_env(stack, &i)?))
            }
            SeqLeaf::Var(a) => out.push(WordSym::Var(a)),
        }
    }
    Ok(out)
}

fn translate(
    ctx: &mut Ctx<'_>,
    heap: &SymbolicHeap,
    f: &Formula,
) -> Result<WordFormula, DecideError> {
    ctx.spend(1)?;
    match f {
        Formula::IndEq(a, b) => {
            let va = crate::model::eval_ind_term_env(ctx.stack, a)?;
            let vb = crate::model::eval_ind_term_env(ctx.stack, b)?;
            Ok(WordFormula::eq(
                vec![WordSym::Letter(va)],
                vec![WordSym::Letter(vb)],
            ))
        }
        Formula::SeqEq(a, b) => Ok(WordFormula::eq(
            convert_term(ctx.stack, a)?,
            convert_term(ctx.stack, b)?,
        )),
        Formula::False => Ok(WordFormula::FalseF),
        Formula::Implies(a, b) => {
            let wa = translate(ctx, heap, a)?;
            let wb = translate(ctx, heap, b)?;
            Ok(WordFormula::implies(wa, wb))
        }
        Formula::Emp => Ok(if heap.0.is_empty() { WordFormula::TrueF } else { WordFormula::FalseF }),
        Formula::PointsTo(t, s) => {
            let loc = crate::model::eval_ind_term_env(ctx.stack, t)?;
            let loc = match loc.as_loc() {
                Some(l) => l,
                None => return Ok(WordFormula::FalseF),
            };
            if heap.domain() != vec![loc] {
                return Ok(WordFormula::FalseF);
            }
            Ok(WordFormula::eq(
                convert_term(ctx.stack, &heap.0[&loc])?,
                convert_term(ctx.stack, s)?,
            ))
        }
        Formula::SepConj(a, b) => {
            let mut branches = Vec::new();
            for (h1, h2) in heap_splits(heap) {
                let wa = translate(ctx, &h1, a)?;
                if matches!(wa, WordFormula::FalseF) {
                    continue;
                }
                let wb = translate(ctx, &h2, b)?;
                branches.push(WordFormula::and(wa, wb));
            }
            Ok(WordFormula::or_all(branches))
        }
        Formula::MagicWand(a, b) => {
            ctx.wand_seen = true;
            let (domain, range) = wand_candidates(ctx.stack, heap, a, b, &ctx.beta)?;
            let mut conjuncts = Vec::new();
            for h1 in extension_heaps(&domain, &range) {
                let wa = translate(ctx, &h1, a)?;
                if matches!(wa, WordFormula::FalseF) {
                    continue;
                }
                let combined = disjoint_union(&h1, heap)
                    .ok_or_else(|| DecideError::Internal("wand candidates overlap the heap".into()))?;
                let wb = translate(ctx, &combined, b)?;
                conjuncts.push(WordFormula::implies(wa, wb));
            }
            Ok(WordFormula::and_all(conjuncts))
        }
        other => Err(FormulaError::NotPropositional(format!("`{other}` in reduction")).into()),
    }
}

/// The candidate locations and cell terms for a wand node: locations are the
/// operands' stack values plus the first `max(sz(a), sz(b))` fresh naturals
/// outside the current domain; cells are the operands' sequence terms plus
/// the empty sequence and the reserved fresh variable.
pub fn wand_candidates(
    stack: &Stack,
    heap: &SymbolicHeap,
    a: &Formula,
    b: &Formula,
    beta: &SeqVar,
) -> Result<(Vec<u64>, Vec<SeqTerm>), DecideError> {
    let mut fv = free_program_vars(a);
    fv.extend(free_program_vars(b));
    let mut base: BTreeSet<u64> = BTreeSet::new();
    for x in &fv {
        if let Some(l) = stack.get(x)?.as_loc() {
            base.insert(l);
        }
    }
    for f in [a, b] {
        base.extend(nat_constants(f));
    }
    let fresh_needed = formula_size(a)?.max(formula_size(b)?);
    let mut fresh = Vec::new();
    let mut candidate = 1u64;
    while (fresh.len() as u64) < fresh_needed {
        if !heap.0.contains_key(&candidate) && !base.contains(&candidate) {
            fresh.push(candidate);
        }
        candidate += 1;
    }
    let mut domain: Vec<u64> = base
        .into_iter()
        .filter(|l| !heap.0.contains_key(l))
        .chain(fresh)
        .collect();
    domain.sort_unstable();
    domain.dedup();

    let mut range: BTreeSet<SeqTerm> = seq_terms(a);
    range.extend(seq_terms(b));
    range.insert(SeqTerm::Empty);
    range.insert(SeqTerm::Var(beta.clone()));
    Ok((domain, range.into_iter().collect()))
}

/// All heaps with domain inside `domain` and cells drawn from `range`:
/// subsets by ascending bitmask, then contents in mixed-radix order.
fn extension_heaps(domain: &[u64], range: &[SeqTerm]) -> Vec<SymbolicHeap> {
    let n = domain.len();
    let mut out = Vec::new();
    for mask in 0u64..(1 << n) {
        let members: Vec<u64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| domain[i]).collect();
        let k = members.len();
        let mut indices = vec![0usize; k];
        loop {
            let mut h = SymbolicHeap::new();
            for (i, l) in members.iter().enumerate() {
                h = h.insert(*l, range[indices[i]].clone());
            }
            out.push(h);
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
    out
}

/// The instance alphabet: all occurring values as content letters, one fresh
/// generator per sequence variable of the word formula.
pub fn instance_alphabet(stack: &Stack, heap: &GroundHeap, f: &Formula, w: &WordFormula) -> Alphabet {
    let mut content: BTreeSet<Value> = BTreeSet::new();
    content.extend(stack.0.values().copied());
    for (l, cell) in &heap.0 {
        content.insert(Value::Nat(*l));
        content.extend(cell.iter().copied());
    }
    for t in seq_terms(f) {
        for leaf in t.flatten() {
            if let SeqLeaf::Ind(i) = leaf {
                if let Some(v) = i.const_value() {
                    content.insert(v);
                }
            }
        }
    }
    let letters: Vec<Value> = content.into_iter().collect();
    Alphabet::new(&letters, w.vars().len())
}

/// Satisfiability of `f` for the given stack and heap: is there a sequence
/// assignment making it hold? A Sat verdict carries a full model that has
/// been re-checked.
pub fn decide_given_stack_heap(
    stack: &Stack,
    heap: &GroundHeap,
    f: &Formula,
    cfg: &DecideConfig,
) -> Result<SatVerdict, DecideError> {
    let reduction = match reduce_with(stack, &heap.to_symbolic(), f, cfg) {
        Ok(r) => r,
        Err(DecideError::TooLarge) => {
            return Ok(SatVerdict::Unknown("reduction exceeds the node budget".into()))
        }
        Err(e) => return Err(e),
    };
    let alphabet = instance_alphabet(stack, heap, f, &reduction.formula);
    match solve(&reduction.formula, &alphabet, &cfg.solve) {
        SolverVerdict::Sat(subst) => {
            let model = witness_model(stack, heap.clone(), f, &subst);
            let verdict = check(&model, f, &CheckConfig::default())?;
            if verdict.is_true() {
                Ok(SatVerdict::Sat(model))
            } else {
                Err(DecideError::Internal(format!(
                    "word solution does not verify as a model (got {verdict})"
                )))
            }
        }
        SolverVerdict::Unsat => Ok(SatVerdict::Unsat),
        SolverVerdict::Unknown(b) => Ok(SatVerdict::Unknown(format!("solver bound {b} exhausted"))),
    }
}

fn witness_model(stack: &Stack, heap: GroundHeap, f: &Formula, subst: &Substitution) -> Model {
    let mut seq = SeqAssignment::new();
    for v in free_seq_vars(f) {
        let value = subst.0.get(&v).cloned().unwrap_or_default();
        seq.0.insert(v, value);
    }
    Model { stack: stack.clone(), seq, heap }
}

/// Satisfiability of `f` for the given stack, over all heaps: checks
/// `f ⟜ true` on the empty heap and recovers the witness heap from the
/// satisfying extension.
pub fn decide_given_stack(
    stack: &Stack,
    f: &Formula,
    cfg: &DecideConfig,
) -> Result<SatVerdict, DecideError> {
    // f ⟜ true  ==  !(f -* !true)
    let septraction = Formula::not(Formula::wand(f.clone(), Formula::not(Formula::True)));
    let empty = GroundHeap::new();
    let inner = match decide_given_stack_heap(stack, &empty, &septraction, cfg) {
        Ok(SatVerdict::Sat(partial)) => partial,
        other => return other,
    };

    // recover a heap for f itself from the septraction's candidate
    // extensions, instantiated by the witness assignment
    let desugared = crate::macros::expand_macros(f)
        .map_err(CheckError::from)?
        .desugar();
    let mut used: BTreeSet<String> = free_seq_vars(&desugared).into_iter().map(|v| v.0).collect();
    let beta = SeqVar::new(crate::formula::fresh_name("b", &mut used));
    let (domain, range) =
        wand_candidates(stack, &SymbolicHeap::new(), &desugared, &Formula::False, &beta)?;

    // the reserved variable did not survive into the model; give it a value
    // distinct from everything so cells mentioning it stay fresh
    let mut max_nat = 0u64;
    for n in inner.all_naturals() {
        max_nat = max_nat.max(n);
    }
    for d in &domain {
        max_nat = max_nat.max(*d);
    }
    let mut seq_with_beta = inner.seq.clone();
    seq_with_beta.0.insert(beta.clone(), vec![Value::Nat(max_nat + 1)]);

    for h1 in extension_heaps(&domain, &range) {
        let ground = match h1.to_ground(stack, &seq_with_beta) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let candidate = Model { stack: stack.clone(), seq: inner.seq.clone(), heap: ground };
        if check(&candidate, f, &CheckConfig::default())?.is_true() {
            return Ok(SatVerdict::Sat(candidate));
        }
    }
    Err(DecideError::Internal(
        "septraction was satisfiable but no candidate heap verifies".into(),
    ))
}

/// Full satisfiability: enumerates stacks mapping the free program variables
/// into the first `|FV|` locations plus the two atoms.
pub fn decide_sat(f: &Formula, cfg: &DecideConfig) -> Result<SatVerdict, DecideError> {
    let desugared = crate::macros::expand_macros(f)
        .map_err(CheckError::from)?
        .desugar();
    ensure_pseqsl(&desugared)?;
    let fv: Vec<_> = free_program_vars(&desugared).into_iter().collect();
    let m = fv.len();
    let mut values: Vec<Value> = vec![Value::Nil, Value::Hash];
    values.extend((1..=m as u64).map(Value::Nat));

    let mut unknown = None;
    let mut assignment = vec![0usize; m];
    loop {
        let mut stack = Stack::new();
        for (i, x) in fv.iter().enumerate() {
            stack.0.insert(x.clone(), values[assignment[i]]);
        }
        match decide_given_stack(&stack, f, cfg)? {
            SatVerdict::Sat(model) => return Ok(SatVerdict::Sat(model)),
            SatVerdict::Unsat => {}
            SatVerdict::Unknown(r) => unknown = Some(r),
        }
        // next assignment
        let mut pos = 0;
        loop {
            if pos == m {
                break;
            }
            assignment[pos] += 1;
            if assignment[pos] < values.len() {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
        if pos == m {
            break;
        }
    }
    Ok(match unknown {
        Some(r) => SatVerdict::Unknown(r),
        None => SatVerdict::Unsat,
    })
}

/// Validity for `forall x* forall a*. psi` with a quantifier-free matrix:
/// valid exactly when the negated matrix is unsatisfiable; a countermodel
/// falsifies the matrix.
pub fn decide_pi1_validity(f: &Formula, cfg: &DecideConfig) -> Result<ValidityVerdict, DecideError> {
    let class = classify(f)?;
    if !(class.shape == Shape::Pi1 || class.quantifier_free) {
        return Err(DecideError::WrongFragment(format!(
            "validity needs a universal prefix over a quantifier-free matrix, got {}",
            class.shape
        )));
    }
    let (_, matrix) = prenex(f)?;
    match decide_sat(&Formula::not(matrix), cfg)? {
        SatVerdict::Unsat => Ok(ValidityVerdict::Valid),
        SatVerdict::Sat(model) => Ok(ValidityVerdict::Invalid(model)),
        SatVerdict::Unknown(r) => Ok(ValidityVerdict::Unknown(r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn cfg() -> DecideConfig {
        DecideConfig::default()
    }

    #[test]
    fn reduce_emp_on_empty_heap_is_true() {
        let r = reduce(&Stack::new(), &SymbolicHeap::new(), &Formula::Emp).unwrap();
        assert_eq!(r.formula, WordFormula::TrueF);
    }

    #[test]
    fn decide_emp() {
        let v = decide_given_stack_heap(&Stack::new(), &GroundHeap::new(), &Formula::Emp, &cfg())
            .unwrap();
        assert!(v.is_sat());
    }

    #[test]
    fn decide_over_heaps_finds_the_empty_heap() {
        let v = decide_given_stack(&Stack::new(), &Formula::Emp, &cfg()).unwrap();
        match v {
            SatVerdict::Sat(model) => assert!(model.heap.0.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn contradictory_domain_facts_are_unsat() {
        // (x |-> nil) /\ emp
        let f = parse_formula("x |-> nil /\\ emp").unwrap();
        let stack = Stack::new().bind("x", Value::Nat(1));
        let v = decide_given_stack(&stack, &f, &cfg()).unwrap();
        assert_eq!(v, SatVerdict::Unsat);
    }

    #[test]
    fn self_extension_is_unsat() {
        // x |-> @a /\ x |-> @a ^ nil forces @a == @a ^ nil
        let f = parse_formula("x |-> @a /\\ x |-> @a ^ nil").unwrap();
        let stack = Stack::new().bind("x", Value::Nat(1));
        let v = decide_given_stack(&stack, &f, &cfg()).unwrap();
        assert_eq!(v, SatVerdict::Unsat);
    }

    #[test]
    fn alloc_shape_is_satisfiable() {
        // (x |-> nil) -* false: vacuously true for an atom-valued x, and
        // true for an allocated location; unsatisfiable antecedents aside,
        // a location-valued stack must allocate x
        let f = parse_formula("(x |-> nil) -* false").unwrap();
        assert!(decide_sat(&f, &cfg()).unwrap().is_sat());

        let stack = Stack::new().bind("x", Value::Nat(1));
        match decide_given_stack(&stack, &f, &cfg()).unwrap() {
            SatVerdict::Sat(model) => {
                assert!(model.heap.0.contains_key(&1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negated_reflexivity_is_unsat() {
        let f = parse_formula("(@a == @a) => false").unwrap();
        assert_eq!(decide_sat(&f, &cfg()).unwrap(), SatVerdict::Unsat);
    }

    #[test]
    fn two_cells_need_distinct_locations() {
        let f = parse_formula("x1 |-> @a * x2 |-> @a").unwrap();
        match decide_sat(&f, &cfg()).unwrap() {
            SatVerdict::Sat(model) => {
                let x1 = model.stack.get(&crate::term::ProgVar::new("x1")).unwrap();
                let x2 = model.stack.get(&crate::term::ProgVar::new("x2")).unwrap();
                assert_ne!(x1, x2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validity_examples() {
        let valid = parse_formula("forall @a. @a == @a").unwrap();
        assert_eq!(decide_pi1_validity(&valid, &cfg()).unwrap(), ValidityVerdict::Valid);

        let pointsto_needs_a_cell =
            parse_formula("forall x. forall @a. (x |-> @a /\\ emp) => false").unwrap();
        assert_eq!(
            decide_pi1_validity(&pointsto_needs_a_cell, &cfg()).unwrap(),
            ValidityVerdict::Valid
        );

        let invalid = parse_formula("forall @a. @a == nil").unwrap();
        match decide_pi1_validity(&invalid, &cfg()).unwrap() {
            ValidityVerdict::Invalid(model) => {
                // the countermodel falsifies the matrix
                let matrix = parse_formula("@a == nil").unwrap();
                let v = check(&model, &matrix, &CheckConfig::default()).unwrap();
                assert!(v.is_false());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_fragment_is_refused() {
        let f = parse_formula("exists x. emp").unwrap();
        assert!(matches!(
            decide_pi1_validity(&f, &cfg()),
            Err(DecideError::WrongFragment(_))
        ));
    }
}
