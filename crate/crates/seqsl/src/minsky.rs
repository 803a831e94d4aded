//! Two-counter machines, their simulation, the encoding of runs as
//! fishbone-shaped heaps (saplings), and the formula family whose bounded
//! validation exercises that encoding.
//!
//! A run is laid out as a chain of master cells with period 4: each state
//! contributes a padding-free delimiter cell followed by three cells whose
//! nil-paddings carry the instruction pointer and the two counters (counters
//! offset by one so their cells are never padding-free). The last cell stores
//! no successor location. The encoding formula is the conjunction of a
//! structure part (unique predecessors, unpointed start), a boundary part
//! (initial and final state blocks), and a transition part (every non-final
//! state block is followed by the block its instruction dictates).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::{fresh_name, Formula};
use crate::macros::{hook, nil_block};
use crate::model::{GroundHeap, Model, SeqAssignment, Stack};
use crate::semantics::Universe;
use crate::term::{IndTerm, ProgVar, SeqTerm};
use crate::value::{Sequence, Value};

/// Stack variable naming the first master cell in run models.
pub const SOURCE_VAR: &str = "x0";
/// Stack variable naming the last master cell in run models.
pub const SINK_VAR: &str = "x0'";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Counter {
    C1,
    C2,
}

impl Counter {
    fn other(self) -> Counter {
        match self {
            Counter::C1 => Counter::C2,
            Counter::C2 => Counter::C1,
        }
    }
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counter::C1 => write!(f, "C1"),
            Counter::C2 => write!(f, "C2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Inc { counter: Counter, goto: usize },
    Test { counter: Counter, goto_zero: usize, goto_dec: usize },
    Halt,
}

/// A machine with `n >= 1` instructions, the last and only the last being
/// `halt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinskyMachine {
    pub instrs: Vec<Instr>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MinskyError {
    #[error("machine file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed machine: {0}")]
    Malformed(String),
    #[error("run has not halted; a run model needs a halting run")]
    NonHaltingRun,
}

impl MinskyMachine {
    pub fn new(instrs: Vec<Instr>) -> Result<Self, MinskyError> {
        let m = MinskyMachine { instrs };
        m.validate()?;
        Ok(m)
    }

    /// Instruction count `n`.
    pub fn size(&self) -> usize {
        self.instrs.len()
    }

    pub fn validate(&self) -> Result<(), MinskyError> {
        let n = self.instrs.len();
        if n == 0 {
            return Err(MinskyError::Malformed("a machine has at least one instruction".into()));
        }
        for (i, instr) in self.instrs.iter().enumerate() {
            let index = i + 1;
            let targets: Vec<usize> = match instr {
                Instr::Halt => {
                    if index != n {
                        return Err(MinskyError::Malformed(format!(
                            "halt at instruction {index}, expected only at {n}"
                        )));
                    }
                    vec![]
                }
                Instr::Inc { goto, .. } => vec![*goto],
                Instr::Test { goto_zero, goto_dec, .. } => vec![*goto_zero, *goto_dec],
            };
            if index == n && !matches!(instr, Instr::Halt) {
                return Err(MinskyError::Malformed(format!(
                    "instruction {n} must be halt"
                )));
            }
            for t in targets {
                if t < 1 || t > n {
                    return Err(MinskyError::Malformed(format!(
                        "instruction {index} jumps to {t}, outside 1..={n}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parses the machine file format, one instruction per line:
    /// `I: inc Cj goto k`, `I: test Cj zero k1 dec k2`, `n: halt`.
    /// Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, MinskyError> {
        let mut instrs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let s = raw.trim();
            if s.is_empty() {
                continue;
            }
            let bad = |msg: &str| MinskyError::Parse { line, msg: msg.to_string() };
            let (idx, rest) = s
                .split_once(':')
                .ok_or_else(|| bad("expected `index:` prefix"))?;
            let idx: usize = idx.trim().parse().map_err(|_| bad("bad instruction index"))?;
            if idx != instrs.len() + 1 {
                return Err(bad(&format!("expected index {}", instrs.len() + 1)));
            }
            let words: Vec<&str> = rest.split_whitespace().collect();
            let counter = |w: &str| match w {
                "C1" => Ok(Counter::C1),
                "C2" => Ok(Counter::C2),
                _ => Err(bad("expected counter C1 or C2")),
            };
            let num = |w: &str| w.parse::<usize>().map_err(|_| bad("expected an instruction index"));
            let instr = match words.as_slice() {
                ["halt"] => Instr::Halt,
                ["inc", c, "goto", k] => Instr::Inc { counter: counter(c)?, goto: num(k)? },
                ["test", c, "zero", k1, "dec", k2] => Instr::Test {
                    counter: counter(c)?,
                    goto_zero: num(k1)?,
                    goto_dec: num(k2)?,
                },
                _ => return Err(bad("expected `inc Cj goto k`, `test Cj zero k1 dec k2`, or `halt`")),
            };
            instrs.push(instr);
        }
        MinskyMachine::new(instrs).map_err(|e| match e {
            MinskyError::Malformed(msg) => MinskyError::Parse { line: 0, msg },
            other => other,
        })
    }
}

impl fmt::Display for MinskyMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, instr) in self.instrs.iter().enumerate() {
            match instr {
                Instr::Halt => writeln!(f, "{}: halt", i + 1)?,
                Instr::Inc { counter, goto } => writeln!(f, "{}: inc {counter} goto {goto}", i + 1)?,
                Instr::Test { counter, goto_zero, goto_dec } => {
                    writeln!(f, "{}: test {counter} zero {goto_zero} dec {goto_dec}", i + 1)?
                }
            }
        }
        Ok(())
    }
}

/// One configuration of a run: instruction pointer and counter values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunState {
    pub instr: usize,
    pub c1: u64,
    pub c2: u64,
}

/// The (unique) run of a machine from `(1, 0, 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub states: Vec<RunState>,
    pub halted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimOutcome {
    Halted(Run),
    NotHaltedWithin { max_steps: usize, partial: Run },
}

/// Runs the machine for at most `max_steps` transitions.
pub fn simulate(m: &MinskyMachine, max_steps: usize) -> Result<SimOutcome, MinskyError> {
    m.validate()?;
    let n = m.size();
    let mut state = RunState { instr: 1, c1: 0, c2: 0 };
    let mut states = vec![state];
    for _ in 0..max_steps {
        if state.instr == n {
            return Ok(SimOutcome::Halted(Run { states, halted: true }));
        }
        state = step(&m.instrs[state.instr - 1], state);
        states.push(state);
    }
    if state.instr == n {
        return Ok(SimOutcome::Halted(Run { states, halted: true }));
    }
    Ok(SimOutcome::NotHaltedWithin { max_steps, partial: Run { states, halted: false } })
}

fn step(instr: &Instr, s: RunState) -> RunState {
    match instr {
        Instr::Halt => s,
        Instr::Inc { counter, goto } => match counter {
            Counter::C1 => RunState { instr: *goto, c1: s.c1 + 1, c2: s.c2 },
            Counter::C2 => RunState { instr: *goto, c1: s.c1, c2: s.c2 + 1 },
        },
        Instr::Test { counter, goto_zero, goto_dec } => {
            let v = match counter {
                Counter::C1 => s.c1,
                Counter::C2 => s.c2,
            };
            if v == 0 {
                RunState { instr: *goto_zero, ..s }
            } else {
                match counter {
                    Counter::C1 => RunState { instr: *goto_dec, c1: s.c1 - 1, c2: s.c2 },
                    Counter::C2 => RunState { instr: *goto_dec, c1: s.c1, c2: s.c2 - 1 },
                }
            }
        }
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.states.iter().enumerate() {
            writeln!(f, "{i}: (I={}, C1={}, C2={})", s.instr, s.c1, s.c2)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Sapling structure formulas.
// ---------------------------------------------------------------------------

fn nil_pad(k: u64) -> SeqTerm {
    SeqTerm::concat_all((0..k).map(|_| SeqTerm::Ind(IndTerm::Nil)))
}

fn pvar(name: &str) -> IndTerm {
    IndTerm::var(name)
}

fn svar(name: &str) -> SeqTerm {
    SeqTerm::var(name)
}

/// `sapling(x0, x0')`: a master chain from `x0` to `x0'` with depth-1 slave
/// paddings. The conjunction of: unique predecessors; no predecessor of
/// `x0`; the two endpoints; and a successor for every pointed, non-final
/// node.
pub fn sapling(x0: &ProgVar, x0p: &ProgVar) -> Formula {
    let [a, b, c, d] = sapling_parts(x0, x0p);
    Formula::and_all([a, b, c, d])
}

/// The four conjuncts of [`sapling`], in order: unique predecessors, no
/// predecessor of the start, endpoints, successor existence.
pub fn sapling_parts(x0: &ProgVar, x0p: &ProgVar) -> [Formula; 4] {
    let mut used: BTreeSet<String> = BTreeSet::from([x0.0.clone(), x0p.0.clone()]);
    let x1 = fresh_name("x1", &mut used);
    let x2 = fresh_name("x2", &mut used);
    let x3 = fresh_name("x3", &mut used);
    let x4 = fresh_name("x4", &mut used);
    let a1 = fresh_name("a1", &mut used);
    let a2 = fresh_name("a2", &mut used);

    // at most one predecessor per node
    let unique_pred = Formula::forall_prog(
        x1.clone(),
        Formula::forall_prog(
            x2.clone(),
            Formula::forall_prog(
                x3.clone(),
                Formula::forall_prog(
                    x4.clone(),
                    Formula::forall_seq(
                        a1.clone(),
                        Formula::forall_seq(
                            a2.clone(),
                            Formula::implies(
                                Formula::sep(
                                    hook(pvar(&x1), SeqTerm::concat(SeqTerm::Ind(pvar(&x3)), svar(&a1))),
                                    hook(pvar(&x2), SeqTerm::concat(SeqTerm::Ind(pvar(&x4)), svar(&a2))),
                                ),
                                Formula::not(Formula::IndEq(pvar(&x3), pvar(&x4))),
                            ),
                        ),
                    ),
                ),
            ),
        ),
    );

    // nothing points at the first master node
    let no_pred_of_start = Formula::forall_prog(
        x1.clone(),
        Formula::forall_seq(
            a1.clone(),
            Formula::not(hook(
                pvar(&x1),
                SeqTerm::concat(SeqTerm::Ind(IndTerm::Var(x0.clone())), svar(&a1)),
            )),
        ),
    );

    // the start is allocated with a bare successor; the end stores no
    // successor
    let endpoints = Formula::and(
        Formula::exists_prog(
            x1.clone(),
            hook(
                IndTerm::Var(x0.clone()),
                SeqTerm::concat(SeqTerm::Ind(pvar(&x1)), SeqTerm::Empty),
            ),
        ),
        Formula::exists_seq(
            a1.clone(),
            hook(
                IndTerm::Var(x0p.clone()),
                SeqTerm::concat(SeqTerm::Empty, svar(&a1)),
            ),
        ),
    );

    // every pointed node except the end points onward
    let successors = Formula::forall_prog(
        x1.clone(),
        Formula::forall_prog(
            x2.clone(),
            Formula::exists_prog(
                x3.clone(),
                Formula::exists_seq(
                    a1.clone(),
                    Formula::exists_seq(
                        a2.clone(),
                        Formula::implies(
                            Formula::and(
                                hook(pvar(&x1), SeqTerm::concat(SeqTerm::Ind(pvar(&x2)), svar(&a1))),
                                Formula::not(Formula::IndEq(pvar(&x2), IndTerm::Var(x0p.clone()))),
                            ),
                            hook(pvar(&x2), SeqTerm::concat(SeqTerm::Ind(pvar(&x3)), svar(&a2))),
                        ),
                    ),
                ),
            ),
        ),
    );

    [unique_pred, no_pred_of_start, endpoints, successors]
}

// ---------------------------------------------------------------------------
// State blocks.
// ---------------------------------------------------------------------------

/// `d ~> k∘ε * k ~> c1∘pad_k * c1 ~> c2∘pad1∘nil * c2 ~> next∘pad2∘nil`
/// where the last factor is configurable (mid-chain vs final form).
fn state_block(
    d: &str,
    k: &str,
    c1: &str,
    c2: &str,
    (pad_k, pad_c1, pad_c2): (SeqTerm, SeqTerm, SeqTerm),
    last_cell_head: Option<&str>,
) -> Formula {
    let first = hook(pvar(d), SeqTerm::concat(SeqTerm::Ind(pvar(k)), SeqTerm::Empty));
    let second = hook(pvar(k), SeqTerm::concat(SeqTerm::Ind(pvar(c1)), pad_k));
    let third = hook(
        pvar(c1),
        SeqTerm::concat_all([SeqTerm::Ind(pvar(c2)), pad_c1, SeqTerm::Ind(IndTerm::Nil)]),
    );
    let fourth_tail = SeqTerm::concat(pad_c2, SeqTerm::Ind(IndTerm::Nil));
    let fourth = match last_cell_head {
        Some(next) => hook(pvar(c2), SeqTerm::concat(SeqTerm::Ind(pvar(next)), fourth_tail)),
        None => hook(pvar(c2), SeqTerm::concat(SeqTerm::Empty, fourth_tail)),
    };
    Formula::sep_all([first, second, third, fourth])
}

fn exists_all_prog(vars: &[String], body: Formula) -> Formula {
    vars.iter().rev().fold(body, |acc, v| Formula::exists_prog(v.clone(), acc))
}

fn exists_all_seq(vars: &[String], body: Formula) -> Formula {
    vars.iter().rev().fold(body, |acc, v| Formula::exists_seq(v.clone(), acc))
}

fn forall_all_prog(vars: &[String], body: Formula) -> Formula {
    vars.iter().rev().fold(body, |acc, v| Formula::forall_prog(v.clone(), acc))
}

fn forall_all_seq(vars: &[String], body: Formula) -> Formula {
    vars.iter().rev().fold(body, |acc, v| Formula::forall_seq(v.clone(), acc))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EncodeOptions {
    /// Emit the two-conjunct regrouping (structure part conjoined with a
    /// single prefixed boundary-and-transition part) instead of the
    /// three-conjunct form.
    pub regrouped: bool,
    /// Scope the transition part's current-state sequence parameters
    /// existentially in the prefix (keeping the `forall x* exists x* exists
    /// a*` shape) instead of universally. The weak scope admits vacuous
    /// instantiations, so only the default strong scope is used for
    /// validation.
    pub weak_transition_scope: bool,
}

/// Encodes the machine's halting problem over the free variables `x0` (first
/// master cell) and `x0'` (last master cell).
pub fn encode(m: &MinskyMachine) -> Result<Formula, MinskyError> {
    encode_with(m, &EncodeOptions::default())
}

pub fn encode_with(m: &MinskyMachine, opts: &EncodeOptions) -> Result<Formula, MinskyError> {
    m.validate()?;
    let n = m.size() as u64;
    let x0 = ProgVar::new(SOURCE_VAR);
    let x0p = ProgVar::new(SINK_VAR);

    // structure part: unique predecessors, nothing points at x0
    let [unique_pred, no_pred, _, _] = sapling_parts(&x0, &x0p);
    let structure = Formula::and(unique_pred, no_pred);

    let boundary = boundary_part(n);
    let p = transition_pieces(m, n);

    if opts.regrouped {
        // two conjuncts: the structure part, and the boundary conjoined with
        // the transition tail under the transition's universal prefix
        let tail = transition_tail(&p, opts.weak_transition_scope);
        let grouped = forall_all_prog(&p.univ_prog, Formula::and(boundary, tail));
        Ok(Formula::and(structure, grouped))
    } else {
        let transition =
            forall_all_prog(&p.univ_prog, transition_tail(&p, opts.weak_transition_scope));
        Ok(Formula::and_all([structure, boundary, transition]))
    }
}

/// The transition formula below its universal program-variable prefix.
///
/// The strong scope quantifies the current block's paddings universally, so
/// an actual current state forces its successor. The weak scope keeps every
/// sequence quantifier existential (the `forall x* exists x* exists a*`
/// prefix shape); it admits instantiations that falsify the antecedent, so it
/// is exposed only for shape comparisons, not for validation.
fn transition_tail(p: &TransitionPieces, weak_scope: bool) -> Formula {
    let consequent = exists_all_prog(
        &p.exist_prog,
        exists_all_seq(&p.exist_seq, p.consequent_core.clone()),
    );
    if weak_scope {
        exists_all_prog(
            &p.exist_prog,
            exists_all_seq(
                &p.univ_seq,
                exists_all_seq(
                    &p.exist_seq,
                    Formula::implies(p.antecedent.clone(), p.consequent_core.clone()),
                ),
            ),
        )
    } else {
        forall_all_seq(&p.univ_seq, Formula::implies(p.antecedent.clone(), consequent))
    }
}

/// The boundary part: an initial block (pointer 1, both counters zero)
/// separated from a final block (pointer `n`), whose counter parameters are
/// constrained to nil-blocks so the final block can only anchor at a cell
/// with a genuinely pointer-free tail. A one-instruction machine halts
/// immediately, so its single block is both; that degenerate case is a
/// disjunct of its own.
fn boundary_part(n: u64) -> Formula {
    let vars: Vec<String> =
        ["z0", "zk", "zc1", "zc2", "z1", "z0'", "zk'", "zc1'", "zc2'"].iter().map(|s| s.to_string()).collect();
    let seqs: Vec<String> = vec!["ac1'".to_string(), "ac2'".to_string()];

    let init = state_block(
        &vars[0], &vars[1], &vars[2], &vars[3],
        (nil_pad(1), SeqTerm::Empty, SeqTerm::Empty),
        Some(&vars[4]),
    );
    let fin = state_block(
        &vars[5], &vars[6], &vars[7], &vars[8],
        (nil_pad(n), svar(&seqs[0]), svar(&seqs[1])),
        None,
    );
    let both = Formula::and_all([
        Formula::sep(init, fin),
        nil_block(svar(&seqs[0])),
        nil_block(svar(&seqs[1])),
    ]);
    let closed = exists_all_prog(&vars, exists_all_seq(&seqs, both));

    if n == 1 {
        let wvars: Vec<String> = ["w0", "wk", "wc1", "wc2"].iter().map(|s| s.to_string()).collect();
        let single = state_block(
            &wvars[0], &wvars[1], &wvars[2], &wvars[3],
            (nil_pad(1), SeqTerm::Empty, SeqTerm::Empty),
            None,
        );
        Formula::or(closed, exists_all_prog(&wvars, single))
    } else {
        closed
    }
}

struct TransitionPieces {
    univ_prog: Vec<String>,
    univ_seq: Vec<String>,
    exist_prog: Vec<String>,
    exist_seq: Vec<String>,
    antecedent: Formula,
    consequent_core: Formula,
}

fn transition_pieces(m: &MinskyMachine, n: u64) -> TransitionPieces {
    let yp: Vec<String> = ["y0", "yk", "yc1", "yc2", "y0'"].iter().map(|s| s.to_string()).collect();
    let bs: Vec<String> = ["bk", "bc1", "bc2"].iter().map(|s| s.to_string()).collect();
    let yq: Vec<String> = ["yk'", "yc1'", "yc2'", "y0''"].iter().map(|s| s.to_string()).collect();
    let bq: Vec<String> = ["bk'", "bc1'", "bc2'"].iter().map(|s| s.to_string()).collect();

    let curr = state_block(
        &yp[0], &yp[1], &yp[2], &yp[3],
        (svar(&bs[0]), svar(&bs[1]), svar(&bs[2])),
        Some(&yp[4]),
    );
    let fin_here = state_block(
        &yp[0], &yp[1], &yp[2], &yp[3],
        (nil_pad(n), svar(&bs[1]), svar(&bs[2])),
        None,
    );

    // successor block anchored at y0'; its last cell either points onward or
    // has the final (pointer-free) form
    let succ_mid = state_block(
        &yp[4], &yq[0], &yq[1], &yq[2],
        (svar(&bq[0]), svar(&bq[1]), svar(&bq[2])),
        Some(&yq[3]),
    );
    let succ_end = state_block(
        &yp[4], &yq[0], &yq[1], &yq[2],
        (svar(&bq[0]), svar(&bq[1]), svar(&bq[2])),
        None,
    );
    let succ = Formula::or(succ_mid, succ_end);

    let paddings_are_nil_blocks = Formula::and_all(
        bs.iter().chain(bq.iter()).map(|b| nil_block(svar(b))),
    );

    let next = instruction_steps(m, &bs, &bq);

    TransitionPieces {
        univ_prog: yp,
        univ_seq: bs,
        exist_prog: yq,
        exist_seq: bq,
        antecedent: Formula::and(curr, Formula::not(fin_here)),
        consequent_core: Formula::and_all([paddings_are_nil_blocks, succ, next]),
    }
}

/// The per-instruction step constraints, guarded by the pointer padding.
fn instruction_steps(m: &MinskyMachine, bs: &[String], bq: &[String]) -> Formula {
    let counter_var = |c: Counter, vars: &[String]| match c {
        Counter::C1 => svar(&vars[1]),
        Counter::C2 => svar(&vars[2]),
    };
    let mut parts = Vec::new();
    for (i, instr) in m.instrs.iter().enumerate() {
        let k0 = (i + 1) as u64;
        let guard = Formula::SeqEq(svar(&bs[0]), nil_pad(k0));
        match instr {
            Instr::Halt => {}
            Instr::Inc { counter, goto } => {
                let grown = Formula::SeqEq(
                    counter_var(*counter, bq),
                    SeqTerm::concat(counter_var(*counter, bs), SeqTerm::Ind(IndTerm::Nil)),
                );
                let kept = Formula::SeqEq(
                    counter_var(counter.other(), bq),
                    counter_var(counter.other(), bs),
                );
                let pointer = Formula::SeqEq(svar(&bq[0]), nil_pad(*goto as u64));
                parts.push(Formula::implies(guard, Formula::and_all([grown, kept, pointer])));
            }
            Instr::Test { counter, goto_zero, goto_dec } => {
                let tested = counter_var(*counter, bs);
                let zero = Formula::implies(
                    Formula::SeqEq(tested.clone(), SeqTerm::Empty),
                    Formula::and_all([
                        Formula::SeqEq(svar(&bq[1]), svar(&bs[1])),
                        Formula::SeqEq(svar(&bq[2]), svar(&bs[2])),
                        Formula::SeqEq(svar(&bq[0]), nil_pad(*goto_zero as u64)),
                    ]),
                );
                let dec = Formula::implies(
                    Formula::not(Formula::SeqEq(tested.clone(), SeqTerm::Empty)),
                    Formula::and_all([
                        Formula::SeqEq(
                            SeqTerm::concat(counter_var(*counter, bq), SeqTerm::Ind(IndTerm::Nil)),
                            tested,
                        ),
                        Formula::SeqEq(
                            counter_var(counter.other(), bq),
                            counter_var(counter.other(), bs),
                        ),
                        Formula::SeqEq(svar(&bq[0]), nil_pad(*goto_dec as u64)),
                    ]),
                );
                parts.push(Formula::implies(guard, Formula::and(zero, dec)));
            }
        }
    }
    Formula::and_all(parts)
}

// ---------------------------------------------------------------------------
// Run models.
// ---------------------------------------------------------------------------

/// A model whose heap is a master chain with period 4 encoding a run, with
/// `x0` bound to the first master cell and `x0'` to the last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaplingModel {
    pub model: Model,
    pub states: usize,
}

/// Builds the chain for explicit per-state padding lengths
/// `(pointer, counter1, counter2)`, each at least 1.
pub fn chain_model(paddings: &[(u64, u64, u64)]) -> SaplingModel {
    let s = paddings.len();
    let mut heap = GroundHeap::new();
    let nils = |k: u64| -> Sequence { (0..k).map(|_| Value::Nil).collect() };
    let pointed = |loc: u64, pad: u64| -> Sequence {
        let mut content = vec![Value::Nat(loc + 1)];
        content.extend(nils(pad));
        content
    };
    for (i, (pk, p1, p2)) in paddings.iter().enumerate() {
        let base = (4 * i + 1) as u64;
        heap.0.insert(base, pointed(base, 0));
        heap.0.insert(base + 1, pointed(base + 1, *pk));
        heap.0.insert(base + 2, pointed(base + 2, *p1));
        // the last cell of the last period has no successor
        if i + 1 == s {
            heap.0.insert(base + 3, nils(*p2));
        } else {
            heap.0.insert(base + 3, pointed(base + 3, *p2));
        }
    }
    let model = Model {
        stack: Stack::new()
            .bind(SOURCE_VAR, Value::Nat(1))
            .bind(SINK_VAR, Value::Nat(4 * s as u64)),
        seq: SeqAssignment::new(),
        heap,
    };
    SaplingModel { model, states: s }
}

/// Encodes a halting run as a sapling model: per period the paddings are
/// empty, `nil^k_i`, `nil^(c1_i+1)`, `nil^(c2_i+1)`.
pub fn build_run_model(run: &Run) -> Result<SaplingModel, MinskyError> {
    if !run.halted {
        return Err(MinskyError::NonHaltingRun);
    }
    let paddings: Vec<(u64, u64, u64)> = run
        .states
        .iter()
        .map(|s| (s.instr as u64, s.c1 + 1, s.c2 + 1))
        .collect();
    Ok(chain_model(&paddings))
}

/// Adds a disjoint cycle of `len` cells, each pointing to the next and the
/// last back to the first, at fresh locations.
pub fn inject_circle(model: &Model, len: usize) -> Model {
    assert!(len >= 1);
    let base = model.all_naturals().into_iter().max().unwrap_or(0) + 1;
    let mut out = model.clone();
    for i in 0..len as u64 {
        let loc = base + i;
        let target = base + ((i + 1) % len as u64);
        out.heap.0.insert(loc, vec![Value::Nat(target)]);
    }
    out
}

/// Candidate universes for checking the encoding family against a chain
/// model: all model locations, and nil-blocks up to the longest cell. The
/// formulas only ever compare nil-blocks and cell tails, so these candidates
/// are exhaustive for them (a validation-suite assumption, not a theorem).
pub fn validation_universe(model: &Model) -> Universe {
    let mut locations: BTreeSet<u64> = model.heap.0.keys().copied().collect();
    locations.extend(model.stack.location_image());
    let longest = model.heap.0.values().map(|c| c.len()).max().unwrap_or(0);
    let sequences: Vec<Sequence> = (0..=longest)
        .map(|k| (0..k).map(|_| Value::Nil).collect())
        .collect();
    Universe { locations: locations.into_iter().collect(), sequences }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    /// The run model of the halting run satisfies the encoding.
    Validated { states: usize },
    NotHalted { max_steps: usize },
    /// The machine halted but its run model failed the encoding.
    EncodingRejected { states: usize },
}

/// Simulates, builds the run model, and checks the encoding against it over
/// the validation universes.
pub fn validate_machine(m: &MinskyMachine, max_steps: usize) -> Result<Validation, MinskyError> {
    let run = match simulate(m, max_steps)? {
        SimOutcome::Halted(run) => run,
        SimOutcome::NotHaltedWithin { max_steps, .. } => {
            return Ok(Validation::NotHalted { max_steps })
        }
    };
    let sm = build_run_model(&run)?;
    let formula = encode(m)?;
    let universe = validation_universe(&sm.model);
    let verdict = crate::semantics::check_closed(&sm.model, &formula, &universe)
        .map_err(|e| MinskyError::Malformed(format!("validation check failed: {e}")))?;
    if verdict.is_true() {
        Ok(Validation::Validated { states: sm.states })
    } else {
        Ok(Validation::EncodingRejected { states: sm.states })
    }
}
