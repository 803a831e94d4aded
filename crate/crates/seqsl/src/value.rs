//! Ground values: the two reserved atoms and the naturals.
//!
//! Locations and data values are both naturals; `nil` and `#` are atoms and
//! are never locations.

use std::fmt;

/// A ground value: an atom or a natural number.
///
/// Naturals double as locations and data. Atoms compare unequal to every
/// natural and to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Nil,
    Hash,
    Nat(u64),
}

impl Value {
    pub fn is_atom(&self) -> bool {
        matches!(self, Value::Nil | Value::Hash)
    }

    /// The location this value denotes, if it is one.
    pub fn as_loc(&self) -> Option<u64> {
        match self {
            Value::Nat(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nil => write!(f, "nil"),
            Value::Hash => write!(f, "#"),
            Value::Nat(n) => write!(f, "{n}"),
        }
    }
}

/// A finite sequence of values, as stored in heap cells and sequence
/// assignments.
pub type Sequence = Vec<Value>;

/// Renders a sequence in the concrete term syntax (`eps` when empty).
pub fn display_sequence(s: &[Value]) -> String {
    if s.is_empty() {
        "eps".to_string()
    } else {
        s.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ^ ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_differ_from_naturals() {
        assert_ne!(Value::Nil, Value::Hash);
        assert_ne!(Value::Nil, Value::Nat(0));
        assert_ne!(Value::Hash, Value::Nat(0));
        assert!(Value::Nil.is_atom());
        assert!(!Value::Nat(3).is_atom());
    }

    #[test]
    fn locations_are_naturals() {
        assert_eq!(Value::Nat(7).as_loc(), Some(7));
        assert_eq!(Value::Nil.as_loc(), None);
    }
}
