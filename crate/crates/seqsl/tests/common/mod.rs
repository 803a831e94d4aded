//! Shared generators and oracles for the integration suites.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use seqsl::formula::Formula;
use seqsl::model::{GroundHeap, Model, SeqAssignment, Stack};
use seqsl::term::{IndTerm, SeqTerm};
use seqsl::value::Value;
use seqsl::wordeq::{WordFormula, WordSym, WordTerm};

pub const PROG_VARS: [&str; 3] = ["x1", "x2", "x3"];
pub const SEQ_VARS: [&str; 2] = ["a1", "a2"];
pub const LETTERS: [u64; 3] = [1, 2, 3];

fn ind_term(rng: &mut StdRng) -> IndTerm {
    match rng.gen_range(0..6) {
        0 => IndTerm::Nil,
        1 => IndTerm::Hash,
        _ => IndTerm::var(PROG_VARS[rng.gen_range(0..PROG_VARS.len())]),
    }
}

fn seq_term(rng: &mut StdRng) -> SeqTerm {
    let len = rng.gen_range(0..=3);
    if len == 0 {
        return SeqTerm::Empty;
    }
    SeqTerm::concat_all((0..len).map(|_| {
        if rng.gen_bool(0.4) {
            SeqTerm::var(SEQ_VARS[rng.gen_range(0..SEQ_VARS.len())])
        } else {
            SeqTerm::Ind(ind_term(rng))
        }
    }))
}

fn atom(rng: &mut StdRng) -> Formula {
    match rng.gen_range(0..10) {
        0..=1 => Formula::IndEq(ind_term(rng), ind_term(rng)),
        2..=4 => Formula::SeqEq(seq_term(rng), seq_term(rng)),
        5..=6 => Formula::Emp,
        7..=8 => Formula::PointsTo(
            IndTerm::var(PROG_VARS[rng.gen_range(0..PROG_VARS.len())]),
            seq_term(rng),
        ),
        _ => Formula::False,
    }
}

/// A random quantifier-free propositional-core formula with at most `budget`
/// connectives. Wand operands stay small so the extension-heap enumeration
/// stays at desk scale.
pub fn random_pseqsl(rng: &mut StdRng, budget: usize) -> Formula {
    if budget == 0 {
        return atom(rng);
    }
    match rng.gen_range(0..100) {
        0..=39 => {
            let left = rng.gen_range(0..budget);
            Formula::implies(
                random_pseqsl(rng, left),
                random_pseqsl(rng, budget - 1 - left),
            )
        }
        40..=69 => {
            let left = rng.gen_range(0..budget);
            Formula::sep(random_pseqsl(rng, left), random_pseqsl(rng, budget - 1 - left))
        }
        70..=84 => {
            let inner = (budget - 1).min(2);
            let left = rng.gen_range(0..=inner.min(1));
            Formula::wand(random_pseqsl(rng, left), random_pseqsl(rng, inner - left))
        }
        _ => atom(rng),
    }
}

/// A random stack over the generator's program variables and a heap with at
/// most three cells, all values drawn from the three-letter alphabet.
pub fn random_model(rng: &mut StdRng) -> (Stack, GroundHeap) {
    let mut stack = Stack::new();
    for x in PROG_VARS {
        stack = stack.bind(x, Value::Nat(LETTERS[rng.gen_range(0..LETTERS.len())]));
    }
    let mut heap = GroundHeap::new();
    for loc in LETTERS {
        if rng.gen_bool(0.55) {
            let len = rng.gen_range(0..=3);
            let cell: Vec<Value> = (0..len)
                .map(|_| Value::Nat(LETTERS[rng.gen_range(0..LETTERS.len())]))
                .collect();
            heap.0.insert(loc, cell);
        }
    }
    (stack, heap)
}

/// A ground model with the given assignment pieces.
pub fn model(stack: Stack, seq: SeqAssignment, heap: GroundHeap) -> Model {
    Model { stack, seq, heap }
}

// -- word-formula generation -------------------------------------------------

fn word_term(rng: &mut StdRng, vars: &[&str], letters: &[Value]) -> WordTerm {
    let len = rng.gen_range(1..=3);
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.45) {
                WordSym::Var(seqsl::term::SeqVar::new(vars[rng.gen_range(0..vars.len())]))
            } else {
                WordSym::Letter(letters[rng.gen_range(0..letters.len())])
            }
        })
        .collect()
}

/// A random Boolean combination over the two-letter alphabet with at most
/// two variables and a bounded number of negations (the single-equation
/// transform grows quickly under nested negation).
pub fn random_word_formula(rng: &mut StdRng, budget: usize, negations: usize) -> WordFormula {
    let vars = ["x", "y"];
    let letters = [Value::Nat(1), Value::Nat(2)];
    fn go(
        rng: &mut StdRng,
        budget: usize,
        negs: usize,
        vars: &[&str],
        letters: &[Value],
    ) -> WordFormula {
        if budget == 0 {
            return WordFormula::Eq(word_term(rng, vars, letters), word_term(rng, vars, letters));
        }
        match rng.gen_range(0..10) {
            0..=3 => {
                let l = rng.gen_range(0..budget);
                WordFormula::And(
                    Box::new(go(rng, l, negs, vars, letters)),
                    Box::new(go(rng, budget - 1 - l, negs, vars, letters)),
                )
            }
            4..=7 => {
                let l = rng.gen_range(0..budget);
                WordFormula::Or(
                    Box::new(go(rng, l, negs, vars, letters)),
                    Box::new(go(rng, budget - 1 - l, negs, vars, letters)),
                )
            }
            _ => {
                if negs > 0 {
                    WordFormula::Not(Box::new(go(rng, 0, negs - 1, vars, letters)))
                } else {
                    WordFormula::Eq(
                        word_term(rng, vars, letters),
                        word_term(rng, vars, letters),
                    )
                }
            }
        }
    }
    go(rng, budget, negations, &vars, &letters)
}

// -- graph oracle ------------------------------------------------------------

/// Is there a walk of exactly `n` edges from `from` to `to` whose first `n`
/// nodes are pairwise distinct? (Each step consumes the source node's cell,
/// so sources along the walk must be distinct; the endpoint is free.)
pub fn walk_exact(adj: &[(u64, Vec<u64>)], from: u64, to: u64, n: usize) -> bool {
    fn succ(adj: &[(u64, Vec<u64>)], v: u64) -> Option<&[u64]> {
        adj.iter().find(|(u, _)| *u == v).map(|(_, vs)| vs.as_slice())
    }
    fn go(adj: &[(u64, Vec<u64>)], at: u64, to: u64, n: usize, seen: &mut Vec<u64>) -> bool {
        if n == 0 {
            return at == to;
        }
        if seen.contains(&at) {
            return false;
        }
        let Some(next) = succ(adj, at) else { return false };
        seen.push(at);
        for v in next {
            if go(adj, *v, to, n - 1, seen) {
                seen.pop();
                return true;
            }
        }
        seen.pop();
        false
    }
    go(adj, from, to, n, &mut Vec::new())
}
