//! Individual and sequence terms.

use std::fmt;

use crate::value::Value;

/// A program variable (individual sort).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProgVar(pub String);

/// A sequence variable. Spelled with a leading `@` in the concrete syntax;
/// the name stored here is without the sigil.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeqVar(pub String);

impl ProgVar {
    pub fn new(name: impl Into<String>) -> Self {
        ProgVar(name.into())
    }
}

impl SeqVar {
    pub fn new(name: impl Into<String>) -> Self {
        SeqVar(name.into())
    }
}

impl fmt::Display for ProgVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for SeqVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

/// An individual term: `nil`, `#`, a natural constant, or a program variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndTerm {
    Nil,
    Hash,
    Nat(u64),
    Var(ProgVar),
}

impl IndTerm {
    pub fn var(name: impl Into<String>) -> Self {
        IndTerm::Var(ProgVar::new(name))
    }

    /// The constant value of a variable-free term.
    pub fn const_value(&self) -> Option<Value> {
        match self {
            IndTerm::Nil => Some(Value::Nil),
            IndTerm::Hash => Some(Value::Hash),
            IndTerm::Nat(n) => Some(Value::Nat(*n)),
            IndTerm::Var(_) => None,
        }
    }
}

impl From<Value> for IndTerm {
    fn from(v: Value) -> Self {
        match v {
            Value::Nil => IndTerm::Nil,
            Value::Hash => IndTerm::Hash,
            Value::Nat(n) => IndTerm::Nat(n),
        }
    }
}

impl fmt::Display for IndTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndTerm::Nil => write!(f, "nil"),
            IndTerm::Hash => write!(f, "#"),
            IndTerm::Nat(n) => write!(f, "{n}"),
            IndTerm::Var(x) => write!(f, "{x}"),
        }
    }
}

/// A sequence term: the empty sequence, a lifted individual term, a sequence
/// variable, or a concatenation.
///
/// Concatenation is binary in the tree but treated associatively; see
/// [`SeqTerm::flatten`] and [`SeqTerm::normalize`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeqTerm {
    Empty,
    Ind(IndTerm),
    Var(SeqVar),
    Concat(Box<SeqTerm>, Box<SeqTerm>),
}

/// One leaf of a flattened sequence term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeqLeaf {
    Ind(IndTerm),
    Var(SeqVar),
}

impl SeqTerm {
    pub fn var(name: impl Into<String>) -> Self {
        SeqTerm::Var(SeqVar::new(name))
    }

    pub fn concat(a: SeqTerm, b: SeqTerm) -> Self {
        SeqTerm::Concat(Box::new(a), Box::new(b))
    }

    /// Left-associated concatenation of the given parts; `eps` when empty.
    pub fn concat_all<I: IntoIterator<Item = SeqTerm>>(parts: I) -> SeqTerm {
        let mut it = parts.into_iter();
        match it.next() {
            None => SeqTerm::Empty,
            Some(first) => it.fold(first, SeqTerm::concat),
        }
    }

    /// A ground term denoting the given value sequence.
    pub fn from_values(vs: &[Value]) -> SeqTerm {
        SeqTerm::concat_all(vs.iter().map(|v| SeqTerm::Ind(IndTerm::from(*v))))
    }

    /// The flat list of non-`Empty` leaves, in order.
    pub fn flatten(&self) -> Vec<SeqLeaf> {
        let mut out = Vec::new();
        self.flatten_into(&mut out);
        out
    }

    fn flatten_into(&self, out: &mut Vec<SeqLeaf>) {
        match self {
            SeqTerm::Empty => {}
            SeqTerm::Ind(t) => out.push(SeqLeaf::Ind(t.clone())),
            SeqTerm::Var(a) => out.push(SeqLeaf::Var(a.clone())),
            SeqTerm::Concat(l, r) => {
                l.flatten_into(out);
                r.flatten_into(out);
            }
        }
    }

    /// The unique normal form: leaves rebuilt as a left-leaning concatenation
    /// with `Empty` removed.
    pub fn normalize(&self) -> SeqTerm {
        SeqTerm::concat_all(self.flatten().into_iter().map(|l| match l {
            SeqLeaf::Ind(t) => SeqTerm::Ind(t),
            SeqLeaf::Var(a) => SeqTerm::Var(a),
        }))
    }

    /// The constant value sequence of a variable-free term.
    pub fn const_value(&self) -> Option<Vec<Value>> {
        let mut out = Vec::new();
        for leaf in self.flatten() {
            match leaf {
                SeqLeaf::Ind(t) => out.push(t.const_value()?),
                SeqLeaf::Var(_) => return None,
            }
        }
        Some(out)
    }

    pub fn seq_vars(&self) -> Vec<SeqVar> {
        self.flatten()
            .into_iter()
            .filter_map(|l| match l {
                SeqLeaf::Var(a) => Some(a),
                _ => None,
            })
            .collect()
    }
}

impl From<IndTerm> for SeqTerm {
    fn from(t: IndTerm) -> Self {
        SeqTerm::Ind(t)
    }
}

impl fmt::Display for SeqTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let leaves = self.flatten();
        if leaves.is_empty() {
            return write!(f, "eps");
        }
        let mut first = true;
        for leaf in leaves {
            if !first {
                write!(f, " ^ ")?;
            }
            first = false;
            match leaf {
                SeqLeaf::Ind(t) => write!(f, "{t}")?,
                SeqLeaf::Var(a) => write!(f, "{a}")?,
            }
        }
        Ok(())
    }
}
