//! Models: stacks, sequence assignments, and heaps (ground and symbolic),
//! with term evaluation and the heap algebra used by the checker and the
//! reduction.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::term::{IndTerm, ProgVar, SeqLeaf, SeqTerm, SeqVar};
use crate::value::{Sequence, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unbound program variable `{0}`")]
    UnboundProgVar(String),
    #[error("unbound sequence variable `@{0}`")]
    UnboundSeqVar(String),
    #[error("malformed model document: {0}")]
    Malformed(String),
}

/// Assignment of program variables to values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stack(pub BTreeMap<ProgVar, Value>);

impl Stack {
    pub fn new() -> Self {
        Stack(BTreeMap::new())
    }

    pub fn bind(mut self, x: impl Into<String>, v: Value) -> Self {
        self.0.insert(ProgVar::new(x), v);
        self
    }

    pub fn get(&self, x: &ProgVar) -> Result<Value, ModelError> {
        self.0
            .get(x)
            .copied()
            .ok_or_else(|| ModelError::UnboundProgVar(x.0.clone()))
    }

    /// Every natural in the image.
    pub fn location_image(&self) -> Vec<u64> {
        self.0.values().filter_map(|v| v.as_loc()).collect()
    }
}

/// Assignment of sequence variables to value sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeqAssignment(pub BTreeMap<SeqVar, Sequence>);

impl SeqAssignment {
    pub fn new() -> Self {
        SeqAssignment(BTreeMap::new())
    }

    pub fn bind(mut self, a: impl Into<String>, s: Sequence) -> Self {
        self.0.insert(SeqVar::new(a), s);
        self
    }

    pub fn get(&self, a: &SeqVar) -> Result<&Sequence, ModelError> {
        self.0
            .get(a)
            .ok_or_else(|| ModelError::UnboundSeqVar(a.0.clone()))
    }
}

/// A finite heap mapping locations to value sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GroundHeap(pub BTreeMap<u64, Sequence>);

/// A heap whose cells store sequence *terms*; arises inside the reduction,
/// where cells may mention still-unassigned sequence variables. A ground heap
/// is the variable-free special case.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolicHeap(pub BTreeMap<u64, SeqTerm>);

impl GroundHeap {
    pub fn new() -> Self {
        GroundHeap(BTreeMap::new())
    }

    pub fn insert(mut self, loc: u64, cell: Sequence) -> Self {
        self.0.insert(loc, cell);
        self
    }

    pub fn domain(&self) -> Vec<u64> {
        self.0.keys().copied().collect()
    }

    pub fn to_symbolic(&self) -> SymbolicHeap {
        SymbolicHeap(
            self.0
                .iter()
                .map(|(l, cell)| (*l, SeqTerm::from_values(cell)))
                .collect(),
        )
    }

    pub fn union_disjoint(&self, other: &GroundHeap) -> Option<GroundHeap> {
        union_disjoint_map(&self.0, &other.0).map(GroundHeap)
    }

    pub fn splits(&self) -> Vec<(GroundHeap, GroundHeap)> {
        splits_map(&self.0)
            .into_iter()
            .map(|(a, b)| (GroundHeap(a), GroundHeap(b)))
            .collect()
    }
}

impl SymbolicHeap {
    pub fn new() -> Self {
        SymbolicHeap(BTreeMap::new())
    }

    pub fn insert(mut self, loc: u64, cell: SeqTerm) -> Self {
        self.0.insert(loc, cell);
        self
    }

    pub fn domain(&self) -> Vec<u64> {
        self.0.keys().copied().collect()
    }

    /// Evaluates every cell; fails on cells with unbound variables.
    pub fn to_ground(&self, stack: &Stack, seq: &SeqAssignment) -> Result<GroundHeap, ModelError> {
        let mut out = BTreeMap::new();
        for (l, cell) in &self.0 {
            out.insert(*l, eval_seq_term_env(stack, seq, cell)?);
        }
        Ok(GroundHeap(out))
    }
}

/// Disjoint union of symbolic heaps. `None` when the domains overlap; callers
/// branch on it.
pub fn disjoint_union(h1: &SymbolicHeap, h2: &SymbolicHeap) -> Option<SymbolicHeap> {
    union_disjoint_map(&h1.0, &h2.0).map(SymbolicHeap)
}

/// All ordered pairs `(h1, h2)` with `h = h1 ⊎ h2`, in a deterministic order:
/// the domain is sorted and subsets are enumerated by ascending bitmask, bit
/// `i` placing the `i`-th smallest location into `h1`.
pub fn heap_splits(h: &SymbolicHeap) -> Vec<(SymbolicHeap, SymbolicHeap)> {
    splits_map(&h.0)
        .into_iter()
        .map(|(a, b)| (SymbolicHeap(a), SymbolicHeap(b)))
        .collect()
}

fn union_disjoint_map<V: Clone>(
    a: &BTreeMap<u64, V>,
    b: &BTreeMap<u64, V>,
) -> Option<BTreeMap<u64, V>> {
    let mut out = a.clone();
    for (k, v) in b {
        if out.insert(*k, v.clone()).is_some() {
            return None;
        }
    }
    Some(out)
}

fn splits_map<V: Clone>(m: &BTreeMap<u64, V>) -> Vec<(BTreeMap<u64, V>, BTreeMap<u64, V>)> {
    let keys: Vec<u64> = m.keys().copied().collect();
    let n = keys.len();
    assert!(n < 60, "heap too large to split");
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u64..(1 << n) {
        let mut h1 = BTreeMap::new();
        let mut h2 = BTreeMap::new();
        for (i, k) in keys.iter().enumerate() {
            if mask & (1 << i) != 0 {
                h1.insert(*k, m[k].clone());
            } else {
                h2.insert(*k, m[k].clone());
            }
        }
        out.push((h1, h2));
    }
    out
}

/// A full model: stack, sequence assignment, and ground heap.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    pub stack: Stack,
    pub seq: SeqAssignment,
    pub heap: GroundHeap,
}

impl Model {
    pub fn eval_ind_term(&self, t: &IndTerm) -> Result<Value, ModelError> {
        eval_ind_term_env(&self.stack, t)
    }

    pub fn eval_seq_term(&self, t: &SeqTerm) -> Result<Sequence, ModelError> {
        eval_seq_term_env(&self.stack, &self.seq, t)
    }

    /// Every natural occurring anywhere in the model.
    pub fn all_naturals(&self) -> Vec<u64> {
        let mut out = Vec::new();
        out.extend(self.stack.location_image());
        for s in self.seq.0.values() {
            out.extend(s.iter().filter_map(|v| v.as_loc()));
        }
        for (l, cell) in &self.heap.0 {
            out.push(*l);
            out.extend(cell.iter().filter_map(|v| v.as_loc()));
        }
        out
    }

    /// Every value (letters and atoms) occurring in the model.
    pub fn occurring_values(&self) -> Vec<Value> {
        let mut out: Vec<Value> = Vec::new();
        out.extend(self.stack.0.values().copied());
        for s in self.seq.0.values() {
            out.extend(s.iter().copied());
        }
        for (l, cell) in &self.heap.0 {
            out.push(Value::Nat(*l));
            out.extend(cell.iter().copied());
        }
        out.sort();
        out.dedup();
        out
    }
}

pub fn eval_ind_term_env(stack: &Stack, t: &IndTerm) -> Result<Value, ModelError> {
    match t {
        IndTerm::Nil => Ok(Value::Nil),
        IndTerm::Hash => Ok(Value::Hash),
        IndTerm::Nat(n) => Ok(Value::Nat(*n)),
        IndTerm::Var(x) => stack.get(x),
    }
}

pub fn eval_seq_term_env(
    stack: &Stack,
    seq: &SeqAssignment,
    t: &SeqTerm,
) -> Result<Sequence, ModelError> {
    let mut out = Vec::new();
    for leaf in t.flatten() {
        match leaf {
            SeqLeaf::Ind(i) => out.push(eval_ind_term_env(stack, &i)?),
            SeqLeaf::Var(a) => out.extend(seq.get(&a)?.iter().copied()),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The model file format: a JSON document with keys "stack" (name -> natural
// or "nil"/"#"), "seq" ("@"-name -> array), "heap" (decimal-string location
// -> array).
// ---------------------------------------------------------------------------

fn value_to_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Nil => serde_json::Value::String("nil".into()),
        Value::Hash => serde_json::Value::String("#".into()),
        Value::Nat(n) => serde_json::Value::Number((*n).into()),
    }
}

fn value_from_json(j: &serde_json::Value) -> Result<Value, ModelError> {
    match j {
        serde_json::Value::Number(n) => n
            .as_u64()
            .map(Value::Nat)
            .ok_or_else(|| ModelError::Malformed(format!("{n} is not a natural"))),
        serde_json::Value::String(s) => match s.as_str() {
            "nil" => Ok(Value::Nil),
            "#" => Ok(Value::Hash),
            other => Err(ModelError::Malformed(format!("unknown value `{other}`"))),
        },
        other => Err(ModelError::Malformed(format!("bad value {other}"))),
    }
}

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| ModelError::Malformed("expected a JSON object".into()))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "stack" | "seq" | "heap") {
            return Err(ModelError::Malformed(format!("unknown key `{key}`")));
        }
    }

    let mut model = Model::default();
    if let Some(stack) = obj.get("stack") {
        let stack = stack
            .as_object()
            .ok_or_else(|| ModelError::Malformed("\"stack\" must be an object".into()))?;
        for (name, v) in stack {
            model.stack.0.insert(ProgVar::new(name.clone()), value_from_json(v)?);
        }
    }
    if let Some(seq) = obj.get("seq") {
        let seq = seq
            .as_object()
            .ok_or_else(|| ModelError::Malformed("\"seq\" must be an object".into()))?;
        for (name, v) in seq {
            let name = name
                .strip_prefix('@')
                .ok_or_else(|| ModelError::Malformed(format!("sequence name `{name}` must start with `@`")))?;
            let arr = v
                .as_array()
                .ok_or_else(|| ModelError::Malformed("sequence values must be arrays".into()))?;
            let vals = arr.iter().map(value_from_json).collect::<Result<Vec<_>, _>>()?;
            model.seq.0.insert(SeqVar::new(name), vals);
        }
    }
    if let Some(heap) = obj.get("heap") {
        let heap = heap
            .as_object()
            .ok_or_else(|| ModelError::Malformed("\"heap\" must be an object".into()))?;
        for (key, v) in heap {
            let loc: u64 = key.parse().map_err(|_| {
                ModelError::Malformed(format!("heap key `{key}` is not a location (atoms are not locations)"))
            })?;
            if loc == 0 {
                return Err(ModelError::Malformed(
                    "heap keys start at 1 in the file format".into(),
                ));
            }
            let arr = v
                .as_array()
                .ok_or_else(|| ModelError::Malformed("heap cells must be arrays".into()))?;
            let vals = arr.iter().map(value_from_json).collect::<Result<Vec<_>, _>>()?;
            model.heap.0.insert(loc, vals);
        }
    }
    Ok(model)
}

pub fn print_model(model: &Model) -> String {
    let mut root = serde_json::Map::new();
    let mut stack = serde_json::Map::new();
    for (x, v) in &model.stack.0 {
        stack.insert(x.0.clone(), value_to_json(v));
    }
    let mut seq = serde_json::Map::new();
    for (a, s) in &model.seq.0 {
        seq.insert(format!("@{}", a.0), serde_json::Value::Array(s.iter().map(value_to_json).collect()));
    }
    let mut heap = serde_json::Map::new();
    for (l, cell) in &model.heap.0 {
        heap.insert(l.to_string(), serde_json::Value::Array(cell.iter().map(value_to_json).collect()));
    }
    root.insert("stack".into(), serde_json::Value::Object(stack));
    root.insert("seq".into(), serde_json::Value::Object(seq));
    root.insert("heap".into(), serde_json::Value::Object(heap));
    serde_json::to_string_pretty(&serde_json::Value::Object(root)).unwrap()
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_model(self))
    }
}
