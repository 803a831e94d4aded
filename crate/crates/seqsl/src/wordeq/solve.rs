//! A sound word-formula solver with bounded completeness.
//!
//! The formula is normalized to existential-free negation normal form and
//! expanded to DNF; each conjunct's positive equations are searched by
//! Nielsen transformations (head analysis under Levi's lemma) with a visited
//! set over normalized systems, while negated equations filter the candidate
//! substitutions of solved states. Termination without budget cuts on a
//! closed state space yields a definitive Unsat; budget cuts yield Unknown.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use crate::term::SeqVar;
use crate::value::Sequence;

use super::{
    term_of_values, verify_substitution, Alphabet, SolverVerdict, Substitution, WordFormula,
    WordSym, WordTerm,
};

#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Bound on candidate value lengths (both for search depth and for
    /// disequality repair).
    pub max_len: usize,
    /// Bound on visited search states and on DNF size.
    pub max_nodes: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { max_len: 8, max_nodes: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Lit {
    Pos(WordTerm, WordTerm),
    Neg(WordTerm, WordTerm),
}

/// Solves a quantifier-free or prenex-existential word formula over the
/// given alphabet.
pub fn solve(f: &WordFormula, alphabet: &Alphabet, cfg: &SolveConfig) -> SolverVerdict {
    // strip the existential prefix: satisfiability treats all variables
    // existentially and the witness covers them
    let mut core = f;
    while let WordFormula::ExistsSeq(_, inner) = core {
        core = inner;
    }
    let branches = match dnf(core, cfg.max_nodes) {
        Ok(b) => b,
        Err(()) => return SolverVerdict::Unknown(cfg.max_nodes),
    };
    let all_vars: Vec<SeqVar> = f.vars().into_iter().collect();

    let mut saw_unknown = false;
    for branch in branches {
        match solve_branch(f, &branch, &all_vars, alphabet, cfg) {
            SolverVerdict::Sat(s) => return SolverVerdict::Sat(s),
            SolverVerdict::Unsat => {}
            SolverVerdict::Unknown(_) => saw_unknown = true,
        }
    }
    if saw_unknown {
        SolverVerdict::Unknown(cfg.max_nodes)
    } else {
        SolverVerdict::Unsat
    }
}

/// Negation normal form into DNF, with a size budget.
fn dnf(f: &WordFormula, budget: usize) -> Result<Vec<Vec<Lit>>, ()> {
    fn go(f: &WordFormula, positive: bool, budget: usize) -> Result<Vec<Vec<Lit>>, ()> {
        match (f, positive) {
            (WordFormula::Eq(a, b), true) => Ok(vec![vec![Lit::Pos(a.clone(), b.clone())]]),
            (WordFormula::Eq(a, b), false) => Ok(vec![vec![Lit::Neg(a.clone(), b.clone())]]),
            (WordFormula::Not(g), _) => go(g, !positive, budget),
            (WordFormula::And(a, b), true) | (WordFormula::Or(a, b), false) => {
                let da = go(a, positive, budget)?;
                let db = go(b, positive, budget)?;
                if da.len().saturating_mul(db.len()) > budget {
                    return Err(());
                }
                let mut out = Vec::new();
                for ca in &da {
                    for cb in &db {
                        let mut c = ca.clone();
                        c.extend(cb.iter().cloned());
                        out.push(c);
                    }
                }
                Ok(out)
            }
            (WordFormula::Or(a, b), true) | (WordFormula::And(a, b), false) => {
                let mut out = go(a, positive, budget)?;
                out.extend(go(b, positive, budget)?);
                if out.len() > budget {
                    return Err(());
                }
                Ok(out)
            }
            (WordFormula::TrueF, true) | (WordFormula::FalseF, false) => Ok(vec![vec![]]),
            (WordFormula::TrueF, false) | (WordFormula::FalseF, true) => Ok(vec![]),
            // inner existentials are implicitly existential anyway; under
            // negation they would be universal, which the solver does not
            // handle
            (WordFormula::ExistsSeq(_, g), true) => go(g, true, budget),
            (WordFormula::ExistsSeq(..), false) => Err(()),
        }
    }
    go(f, true, budget)
}

type System = Vec<(Vec<WordSym>, Vec<WordSym>)>;

/// One logged transformation: the variable and what it was rewritten to
/// (which may mention the variable itself).
type LogEntry = (SeqVar, Vec<WordSym>);

fn solve_branch(
    original: &WordFormula,
    branch: &[Lit],
    all_vars: &[SeqVar],
    alphabet: &Alphabet,
    cfg: &SolveConfig,
) -> SolverVerdict {
    let mut system: System = Vec::new();
    let mut diseqs: Vec<(WordTerm, WordTerm)> = Vec::new();
    for lit in branch {
        match lit {
            Lit::Pos(a, b) => system.push((a.clone(), b.clone())),
            Lit::Neg(a, b) => diseqs.push((a.clone(), b.clone())),
        }
    }

    let mut queue: VecDeque<(System, Vec<LogEntry>)> = VecDeque::new();
    let mut visited: HashSet<System> = HashSet::new();
    let mut popped = 0usize;
    let mut budget_cut = false;
    let mut blocked_solution = false;
    let depth_cap = cfg.max_len * (all_vars.len() + 1) + 4;

    match normalize(system) {
        Norm::Dead => return SolverVerdict::Unsat,
        Norm::Ok(sys, forced) => {
            queue.push_back((sys, forced));
        }
    }

    while let Some((sys, log)) = queue.pop_front() {
        popped += 1;
        if popped > cfg.max_nodes {
            budget_cut = true;
            break;
        }
        if sys.is_empty() {
            match repair_diseqs(original, &log, &diseqs, all_vars, alphabet, cfg) {
                Repair::Witness(subst) => return SolverVerdict::Sat(subst),
                // a disequality collapsed to identical sides: no assignment
                // of the leftover variables can ever satisfy this state
                Repair::DeadForever => continue,
                Repair::Inconclusive => {
                    blocked_solution = true;
                    continue;
                }
            }
        }
        if log.len() > depth_cap {
            budget_cut = true;
            continue;
        }

        // branch on the first equation's heads
        let (lhs, rhs) = &sys[0];
        let branches: Vec<LogEntry> = match (lhs.first(), rhs.first()) {
            (Some(WordSym::Var(x)), Some(WordSym::Letter(a))) => vec![
                (x.clone(), vec![]),
                (x.clone(), vec![WordSym::Letter(*a), WordSym::Var(x.clone())]),
            ],
            (Some(WordSym::Letter(a)), Some(WordSym::Var(x))) => vec![
                (x.clone(), vec![]),
                (x.clone(), vec![WordSym::Letter(*a), WordSym::Var(x.clone())]),
            ],
            (Some(WordSym::Var(x)), Some(WordSym::Var(y))) => vec![
                (x.clone(), vec![]),
                (y.clone(), vec![]),
                (x.clone(), vec![WordSym::Var(y.clone()), WordSym::Var(x.clone())]),
                (y.clone(), vec![WordSym::Var(x.clone()), WordSym::Var(y.clone())]),
            ],
            // normalization leaves no other head combination
            _ => vec![],
        };

        for (var, repl) in branches {
            let next = apply(&sys, &var, &repl);
            match normalize(next) {
                Norm::Dead => {}
                Norm::Ok(nsys, mut forced) => {
                    if visited.insert(nsys.clone()) {
                        let mut nlog = log.clone();
                        nlog.push((var.clone(), repl.clone()));
                        nlog.append(&mut forced);
                        queue.push_back((nsys, nlog));
                    }
                }
            }
        }
    }

    if budget_cut || blocked_solution {
        SolverVerdict::Unknown(cfg.max_nodes)
    } else {
        SolverVerdict::Unsat
    }
}

enum Norm {
    Dead,
    /// Normalized system plus any forced substitutions applied on the way.
    Ok(System, Vec<LogEntry>),
}

/// Strips matched prefixes and ground suffixes, drops trivial equations,
/// applies forced empty-variable assignments, and detects dead states.
fn normalize(mut system: System) -> Norm {
    let mut forced: Vec<LogEntry> = Vec::new();
    loop {
        let mut changed = false;
        let mut next: System = Vec::new();
        let mut force: Option<SeqVar> = None;
        for (mut l, mut r) in system {
            // matched prefixes
            let mut i = 0;
            while i < l.len() && i < r.len() && l[i] == r[i] {
                i += 1;
            }
            l.drain(..i);
            r.drain(..i);
            // matched suffixes (free monoids cancel on both sides)
            while let (Some(a), Some(b)) = (l.last(), r.last()) {
                if a == b {
                    l.pop();
                    r.pop();
                } else {
                    break;
                }
            }
            match (l.first(), r.first()) {
                (None, None) => {
                    changed = true;
                    continue;
                }
                (None, Some(_)) | (Some(_), None) => {
                    let side = if l.is_empty() { &r } else { &l };
                    // everything must vanish: letters kill the branch,
                    // variables are forced empty
                    match side.first() {
                        Some(WordSym::Letter(_)) | None => return Norm::Dead,
                        Some(WordSym::Var(v)) => {
                            force = Some(v.clone());
                            next.push((l, r));
                        }
                    }
                }
                (Some(WordSym::Letter(a)), Some(WordSym::Letter(b))) => {
                    if a == b {
                        unreachable!("matched prefixes were stripped");
                    }
                    return Norm::Dead;
                }
                _ => next.push((l, r)),
            }
        }
        // a letters-only empty-side case slipped through: re-examine
        if let Some(v) = force {
            forced.push((v.clone(), vec![]));
            system = apply(&next, &v, &[]);
            continue;
        }
        system = next;
        if !changed {
            return Norm::Ok(system, forced);
        }
    }
}

fn apply(system: &System, var: &SeqVar, repl: &[WordSym]) -> System {
    let sub = |side: &Vec<WordSym>| -> Vec<WordSym> {
        let mut out = Vec::with_capacity(side.len());
        for s in side {
            match s {
                WordSym::Var(v) if v == var => out.extend(repl.iter().cloned()),
                other => out.push(other.clone()),
            }
        }
        out
    };
    system.iter().map(|(l, r)| (sub(l), sub(r))).collect()
}

/// Reconstructs the composed substitution: play the log backwards over a
/// base assignment of the leftover free variables.
fn reconstruct(log: &[LogEntry], base: &BTreeMap<SeqVar, Sequence>, vars: &[SeqVar]) -> Substitution {
    let mut m: BTreeMap<SeqVar, Sequence> = base.clone();
    for (var, repl) in log.iter().rev() {
        let mut value = Vec::new();
        for s in repl {
            match s {
                WordSym::Letter(v) => value.push(*v),
                WordSym::Var(v) => value.extend(m.get(v).cloned().unwrap_or_default()),
            }
        }
        m.insert(var.clone(), value);
    }
    let mut subst = Substitution::new();
    for v in vars {
        subst.0.insert(v.clone(), m.get(v).cloned().unwrap_or_default());
    }
    subst
}

enum Repair {
    Witness(Substitution),
    /// Some disequality has syntactically identical sides after the solved
    /// state's substitutions; no assignment can ever repair it.
    DeadForever,
    Inconclusive,
}

/// Replays the log over a term, yielding its shape over the leftover free
/// variables.
fn apply_log_to_term(term: &WordTerm, log: &[LogEntry]) -> WordTerm {
    let mut out = term.clone();
    for (var, repl) in log {
        let mut next = Vec::with_capacity(out.len());
        for s in &out {
            match s {
                WordSym::Var(v) if v == var => next.extend(repl.iter().cloned()),
                other => next.push(other.clone()),
            }
        }
        out = next;
    }
    out
}

/// Searches for a base assignment of the leftover variables that satisfies
/// the branch's disequalities (and re-verifies the whole formula).
fn repair_diseqs(
    original: &WordFormula,
    log: &[LogEntry],
    diseqs: &[(WordTerm, WordTerm)],
    all_vars: &[SeqVar],
    alphabet: &Alphabet,
    cfg: &SolveConfig,
) -> Repair {
    let residual: Vec<(WordTerm, WordTerm)> = diseqs
        .iter()
        .map(|(a, b)| (apply_log_to_term(a, log), apply_log_to_term(b, log)))
        .collect();
    for (a, b) in &residual {
        if a == b {
            return Repair::DeadForever;
        }
    }

    // only variables still occurring in a disequality can affect them
    let mut free: BTreeSet<SeqVar> = BTreeSet::new();
    for (a, b) in &residual {
        for s in a.iter().chain(b) {
            if let WordSym::Var(v) = s {
                free.insert(v.clone());
            }
        }
    }
    let relevant: Vec<SeqVar> = free.into_iter().collect();

    let check = |base: &BTreeMap<SeqVar, Sequence>| -> Option<Substitution> {
        let subst = reconstruct(log, base, all_vars);
        for (a, b) in diseqs {
            let va = term_of_values(a, &subst).ok()?;
            let vb = term_of_values(b, &subst).ok()?;
            if va == vb {
                return None;
            }
        }
        if verify_substitution(original, &subst).unwrap_or(false) {
            Some(subst)
        } else {
            None
        }
    };

    if relevant.is_empty() {
        return match check(&BTreeMap::new()) {
            Some(s) => Repair::Witness(s),
            None => Repair::Inconclusive,
        };
    }

    // enumerate short assignments for the free variables
    let repair_len = cfg.max_len.min(3);
    let words = alphabet.words_up_to(repair_len);
    let mut tries = 0usize;
    let mut base: BTreeMap<SeqVar, Sequence> = BTreeMap::new();
    fn rec(
        vars: &[SeqVar],
        words: &[Sequence],
        base: &mut BTreeMap<SeqVar, Sequence>,
        tries: &mut usize,
        cap: usize,
        check: &dyn Fn(&BTreeMap<SeqVar, Sequence>) -> Option<Substitution>,
    ) -> Option<Substitution> {
        match vars.first() {
            None => {
                *tries += 1;
                if *tries > cap {
                    return None;
                }
                check(base)
            }
            Some(v) => {
                for w in words {
                    base.insert(v.clone(), w.clone());
                    if let Some(s) = rec(&vars[1..], words, base, tries, cap, check) {
                        return Some(s);
                    }
                    if *tries > cap {
                        return None;
                    }
                }
                base.remove(v);
                None
            }
        }
    }
    match rec(&relevant, &words, &mut base, &mut tries, 50_000, &check) {
        Some(s) => Repair::Witness(s),
        None => Repair::Inconclusive,
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_word_formula;
    use super::*;
    use crate::value::Value;

    fn ab() -> Alphabet {
        Alphabet::new(&[Value::Nat(1), Value::Nat(2)], 0)
    }

    fn run(text: &str) -> SolverVerdict {
        let f = parse_word_formula(text).unwrap();
        solve(&f, &ab(), &SolveConfig::default())
    }

    #[test]
    fn direct_assignment() {
        match run("@a == 1 ^ 2") {
            SolverVerdict::Sat(s) => {
                assert_eq!(s.0[&SeqVar::new("a")], vec![Value::Nat(1), Value::Nat(2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn conjugation_mismatch_closes_as_unsat() {
        // a ^ 2 == 1 ^ a cycles; the visited set closes the search
        assert_eq!(run("@a ^ 2 == 1 ^ @a"), SolverVerdict::Unsat);
    }

    #[test]
    fn commutation_is_satisfied() {
        assert!(run("@a ^ 1 == 1 ^ @a").is_sat());
    }

    #[test]
    fn negated_reflexive_equation_is_unsat() {
        assert_eq!(run("~(@a == @a)"), SolverVerdict::Unsat);
    }

    #[test]
    fn disequality_repair_finds_a_witness() {
        match run("@a ^ @b == 1 ^ 2 & ~(@a == 1)") {
            SolverVerdict::Sat(s) => {
                assert_ne!(s.0[&SeqVar::new("a")], vec![Value::Nat(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_variable_split() {
        assert!(run("@a ^ @b == 1 ^ 2").is_sat());
    }

    #[test]
    fn ground_truths() {
        assert!(run("1 ^ 2 == 1 ^ 2").is_sat());
        assert_eq!(run("1 == 2"), SolverVerdict::Unsat);
    }

    #[test]
    fn solver_sat_verdicts_verify() {
        for text in [
            "@a == 1 ^ 2",
            "@a ^ 1 == 1 ^ @a",
            "@a ^ @b == 1 ^ 2 & ~(@a == 1)",
            "@a ^ @b == @b ^ @a",
            "(@a == 1 | @a == 2) & ~(@a == 1)",
        ] {
            let f = parse_word_formula(text).unwrap();
            if let SolverVerdict::Sat(s) = solve(&f, &ab(), &SolveConfig::default()) {
                assert!(verify_substitution(&f, &s).unwrap(), "witness fails for {text}");
            } else {
                panic!("expected sat for {text}");
            }
        }
    }
}
