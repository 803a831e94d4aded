//! Concrete syntax for formulas.
//!
//! Precedence, low to high: `=>` (right-assoc), `\/`, `/\`, `-*`/`-o`
//! (right-assoc), `*`, `!`, atoms. Sequence variables are `@`-prefixed,
//! concatenation is `^`, the empty sequence is `eps`, points-to is `|->`,
//! hook-arrow is `~>`, magic wand is `-*`, septraction is `-o`. Quantifiers
//! `exists x.` / `forall @a.` extend as far right as possible.

use thiserror::Error;

use crate::formula::{Formula, MacroCall, MacroArg};
use crate::macros::macro_exists;
use crate::term::{IndTerm, SeqTerm};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, msg: msg.into() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    SeqVar(String),
    Nat(u64),
    HashSym,
    LParen,
    RParen,
    Dot,
    Comma,
    Caret,
    Eq,      // =
    SeqEq,   // ==
    NotEq,   // !=
    Implies, // =>
    PointsTo,
    HookArrow,
    Wand,
    Septraction,
    Star,
    AndOp,
    OrOp,
    Bang,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while let Some(t) = self.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        while matches!(self.peek_byte(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let b = match self.peek_byte() {
            None => return Ok(None),
            Some(b) => b,
        };
        let tok = match b {
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'.' => {
                self.pos += 1;
                Tok::Dot
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'#' => {
                self.pos += 1;
                Tok::HashSym
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'=' => {
                self.pos += 1;
                match self.peek_byte() {
                    Some(b'=') => {
                        self.pos += 1;
                        Tok::SeqEq
                    }
                    Some(b'>') => {
                        self.pos += 1;
                        Tok::Implies
                    }
                    _ => Tok::Eq,
                }
            }
            b'!' => {
                self.pos += 1;
                if self.peek_byte() == Some(b'=') {
                    self.pos += 1;
                    Tok::NotEq
                } else {
                    Tok::Bang
                }
            }
            b'~' => {
                self.pos += 1;
                if self.peek_byte() == Some(b'>') {
                    self.pos += 1;
                    Tok::HookArrow
                } else {
                    return err(start, "expected `~>`");
                }
            }
            b'-' => {
                self.pos += 1;
                match self.peek_byte() {
                    Some(b'*') => {
                        self.pos += 1;
                        Tok::Wand
                    }
                    Some(b'o') => {
                        self.pos += 1;
                        Tok::Septraction
                    }
                    _ => return err(start, "expected `-*` or `-o`"),
                }
            }
            b'|' => {
                if self.src[self.pos..].starts_with(b"|->") {
                    self.pos += 3;
                    Tok::PointsTo
                } else {
                    return err(start, "expected `|->`");
                }
            }
            b'/' => {
                if self.src[self.pos..].starts_with(b"/\\") {
                    self.pos += 2;
                    Tok::AndOp
                } else {
                    return err(start, "expected `/\\`");
                }
            }
            b'\\' => {
                if self.src[self.pos..].starts_with(b"\\/") {
                    self.pos += 2;
                    Tok::OrOp
                } else {
                    return err(start, "expected `\\/`");
                }
            }
            b'@' => {
                self.pos += 1;
                let name = self.lex_ident()?;
                Tok::SeqVar(name)
            }
            b'0'..=b'9' => {
                let mut n: u64 = 0;
                while let Some(d @ b'0'..=b'9') = self.peek_byte() {
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add((d - b'0') as u64))
                        .ok_or(ParseError { pos: start, msg: "numeric literal overflows".into() })?;
                    self.pos += 1;
                }
                Tok::Nat(n)
            }
            b'a'..=b'z' | b'A'..=b'Z' => Tok::Ident(self.lex_ident()?),
            other => return err(start, format!("unexpected character `{}`", other as char)),
        };
        Ok(Some((tok, start)))
    }

    fn lex_ident(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.peek_byte() {
            Some(b'a'..=b'z' | b'A'..=b'Z') => self.pos += 1,
            _ => return err(start, "expected identifier"),
        }
        while matches!(
            self.peek_byte(),
            Some(b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_' | b'\'')
        ) {
            self.pos += 1;
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

/// Parses a formula in the concrete grammar.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, idx: 0, end: text.len() };
    let f = p.formula()?;
    match p.peek() {
        None => Ok(f),
        Some((_, pos)) => err(*pos, "trailing input after formula"),
    }
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.idx)
    }

    fn pos(&self) -> usize {
        self.peek().map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some((t, _)) if t == want => {
                self.idx += 1;
                Ok(())
            }
            _ => err(self.pos(), format!("expected {what}")),
        }
    }

    // formula := implies
    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_level()?;
        if matches!(self.peek(), Some((Tok::Implies, _))) {
            self.idx += 1;
            let rhs = self.implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and_level()?;
        while matches!(self.peek(), Some((Tok::OrOp, _))) {
            self.idx += 1;
            let rhs = self.and_level()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.wand_level()?;
        while matches!(self.peek(), Some((Tok::AndOp, _))) {
            self.idx += 1;
            let rhs = self.wand_level()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn wand_level(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.sep_level()?;
        match self.peek() {
            Some((Tok::Wand, _)) => {
                self.idx += 1;
                let rhs = self.wand_level()?;
                Ok(Formula::wand(lhs, rhs))
            }
            Some((Tok::Septraction, _)) => {
                self.idx += 1;
                let rhs = self.wand_level()?;
                Ok(Formula::Macro(MacroCall {
                    name: "septraction".into(),
                    args: vec![
                        MacroArg::Formula(Box::new(lhs)),
                        MacroArg::Formula(Box::new(rhs)),
                    ],
                }))
            }
            _ => Ok(lhs),
        }
    }

    fn sep_level(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while matches!(self.peek(), Some((Tok::Star, _))) {
            self.idx += 1;
            let rhs = self.unary()?;
            acc = Formula::sep(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if matches!(self.peek(), Some((Tok::Bang, _))) {
            self.idx += 1;
            let inner = self.unary()?;
            return Ok(Formula::not(inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let (tok, pos) = match self.peek().cloned() {
            Some(t) => t,
            None => return err(self.pos(), "expected a formula"),
        };
        match tok {
            Tok::LParen => {
                self.idx += 1;
                let f = self.formula()?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(name) => match name.as_str() {
                "emp" => {
                    self.idx += 1;
                    Ok(Formula::Emp)
                }
                "true" => {
                    self.idx += 1;
                    Ok(Formula::True)
                }
                "false" => {
                    self.idx += 1;
                    Ok(Formula::False)
                }
                "exists" | "forall" => {
                    self.idx += 1;
                    let universal = name == "forall";
                    let binder = self.bump();
                    let mk: Box<dyn Fn(Formula) -> Formula> = match binder {
                        Some((Tok::Ident(x), bpos)) => {
                            if is_reserved(&x) {
                                return err(bpos, format!("`{x}` cannot be bound"));
                            }
                            if universal {
                                Box::new(move |body| Formula::forall_prog(x.clone(), body))
                            } else {
                                Box::new(move |body| Formula::exists_prog(x.clone(), body))
                            }
                        }
                        Some((Tok::SeqVar(a), _)) => {
                            if universal {
                                Box::new(move |body| Formula::forall_seq(a.clone(), body))
                            } else {
                                Box::new(move |body| Formula::exists_seq(a.clone(), body))
                            }
                        }
                        _ => return err(self.pos(), "expected a variable after the quantifier"),
                    };
                    self.eat(&Tok::Dot, "`.` after the quantified variable")?;
                    let body = self.formula()?;
                    Ok(mk(body))
                }
                _ => {
                    // macro call or an equality/points-to atom starting with a term
                    if matches!(self.toks.get(self.idx + 1), Some((Tok::LParen, _))) {
                        self.macro_call(name, pos)
                    } else {
                        self.relation()
                    }
                }
            },
            Tok::SeqVar(_) | Tok::Nat(_) | Tok::HashSym => self.relation(),
            _ => err(pos, "expected a formula"),
        }
    }

    fn macro_call(&mut self, name: String, pos: usize) -> Result<Formula, ParseError> {
        if !macro_exists(&name) {
            return err(pos, format!("unknown macro `{name}`"));
        }
        self.idx += 1; // name
        self.eat(&Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if !matches!(self.peek(), Some((Tok::RParen, _))) {
            loop {
                let t = self.seq_term()?;
                args.push(term_to_arg(t));
                if matches!(self.peek(), Some((Tok::Comma, _))) {
                    self.idx += 1;
                } else {
                    break;
                }
            }
        }
        self.eat(&Tok::RParen, "`)`")?;
        Ok(Formula::Macro(MacroCall { name, args }))
    }

    // term (= | == | != | |-> | ~>) term
    fn relation(&mut self) -> Result<Formula, ParseError> {
        let lhs_pos = self.pos();
        let lhs = self.seq_term()?;
        let (op, op_pos) = match self.bump() {
            Some((t, p)) => (t, p),
            None => return err(self.pos(), "expected `=`, `==`, `!=`, `|->` or `~>`"),
        };
        match op {
            Tok::Eq => {
                let rhs_pos = self.pos();
                let rhs = self.seq_term()?;
                let a = as_individual(&lhs)
                    .ok_or(ParseError { pos: lhs_pos, msg: "`=` expects individual terms".into() })?;
                let b = as_individual(&rhs)
                    .ok_or(ParseError { pos: rhs_pos, msg: "`=` expects individual terms".into() })?;
                Ok(Formula::IndEq(a, b))
            }
            Tok::SeqEq => {
                let rhs = self.seq_term()?;
                Ok(Formula::SeqEq(lhs, rhs))
            }
            Tok::NotEq => {
                let rhs = self.seq_term()?;
                match (as_individual(&lhs), as_individual(&rhs)) {
                    (Some(a), Some(b)) => Ok(Formula::not(Formula::IndEq(a, b))),
                    _ => Ok(Formula::not(Formula::SeqEq(lhs, rhs))),
                }
            }
            Tok::PointsTo => {
                let a = as_individual(&lhs).ok_or(ParseError {
                    pos: lhs_pos,
                    msg: "`|->` expects an individual term on the left".into(),
                })?;
                let rhs = self.seq_term()?;
                Ok(Formula::PointsTo(a, rhs))
            }
            Tok::HookArrow => {
                let a = as_individual(&lhs).ok_or(ParseError {
                    pos: lhs_pos,
                    msg: "`~>` expects an individual term on the left".into(),
                })?;
                let rhs = self.seq_term()?;
                Ok(Formula::Macro(MacroCall {
                    name: "hookarrow".into(),
                    args: vec![MacroArg::Ind(a), MacroArg::Seq(rhs)],
                }))
            }
            _ => err(op_pos, "expected `=`, `==`, `!=`, `|->` or `~>`"),
        }
    }

    // seq_term := term_atom ("^" term_atom)*
    fn seq_term(&mut self) -> Result<SeqTerm, ParseError> {
        let mut acc = self.term_atom()?;
        while matches!(self.peek(), Some((Tok::Caret, _))) {
            self.idx += 1;
            let rhs = self.term_atom()?;
            acc = SeqTerm::concat(acc, rhs);
        }
        Ok(acc)
    }

    fn term_atom(&mut self) -> Result<SeqTerm, ParseError> {
        match self.bump() {
            Some((Tok::Ident(name), pos)) => match name.as_str() {
                "eps" => Ok(SeqTerm::Empty),
                "nil" => Ok(SeqTerm::Ind(IndTerm::Nil)),
                "emp" | "true" | "false" | "exists" | "forall" => {
                    err(pos, format!("`{name}` is not a term"))
                }
                _ => Ok(SeqTerm::Ind(IndTerm::var(name))),
            },
            Some((Tok::SeqVar(a), _)) => Ok(SeqTerm::var(a)),
            Some((Tok::Nat(n), _)) => Ok(SeqTerm::Ind(IndTerm::Nat(n))),
            Some((Tok::HashSym, _)) => Ok(SeqTerm::Ind(IndTerm::Hash)),
            Some((_, pos)) => err(pos, "expected a term"),
            None => err(self.pos(), "expected a term"),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "emp" | "true" | "false" | "exists" | "forall" | "eps" | "nil")
}

/// A sequence term that is syntactically a single individual term.
fn as_individual(s: &SeqTerm) -> Option<IndTerm> {
    match s {
        SeqTerm::Ind(t) => Some(t.clone()),
        _ => None,
    }
}

fn term_to_arg(t: SeqTerm) -> MacroArg {
    match t {
        SeqTerm::Ind(i) => MacroArg::Ind(i),
        other => MacroArg::Seq(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::ProgVar;

    #[test]
    fn keywords_and_atoms() {
        assert_eq!(parse_formula("emp").unwrap(), Formula::Emp);
        assert_eq!(parse_formula("true").unwrap(), Formula::True);
        assert_eq!(parse_formula("x = nil").unwrap(), Formula::IndEq(IndTerm::var("x"), IndTerm::Nil));
    }

    #[test]
    fn points_to_with_concat() {
        // x1 |-> @a ^ x3
        let f = parse_formula("x1 |-> @a ^ x3").unwrap();
        assert_eq!(
            f,
            Formula::PointsTo(
                IndTerm::var("x1"),
                SeqTerm::concat(SeqTerm::var("a"), SeqTerm::Ind(IndTerm::var("x3")))
            )
        );
    }

    #[test]
    fn forall_desugars_to_not_exists_not() {
        let f = parse_formula("forall @a. @a == @a").unwrap();
        let body = Formula::SeqEq(SeqTerm::var("a"), SeqTerm::var("a"));
        assert_eq!(f, Formula::not(Formula::exists_seq("a", Formula::not(body))));
    }

    #[test]
    fn precedence_and_associativity() {
        // => binds weakest and to the right
        let f = parse_formula("emp => emp => false").unwrap();
        assert_eq!(
            f,
            Formula::implies(Formula::Emp, Formula::implies(Formula::Emp, Formula::False))
        );
        // * binds tighter than -*
        let g = parse_formula("emp * emp -* emp").unwrap();
        assert_eq!(g, Formula::wand(Formula::sep(Formula::Emp, Formula::Emp), Formula::Emp));
        // /\ above \/
        let h = parse_formula("emp \\/ emp /\\ false").unwrap();
        assert_eq!(h, Formula::or(Formula::Emp, Formula::and(Formula::Emp, Formula::False)));
    }

    #[test]
    fn septraction_and_hookarrow_are_macros() {
        let f = parse_formula("emp -o emp").unwrap();
        assert!(matches!(&f, Formula::Macro(m) if m.name == "septraction"));
        let g = parse_formula("x ~> @a").unwrap();
        assert!(matches!(&g, Formula::Macro(m) if m.name == "hookarrow"));
    }

    #[test]
    fn inequality_sugar() {
        let f = parse_formula("x != y").unwrap();
        assert_eq!(
            f,
            Formula::not(Formula::IndEq(IndTerm::var("x"), IndTerm::var("y")))
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_formula("x |-> ").unwrap_err();
        assert_eq!(e.pos, 6);
        let e = parse_formula("nosuchmacro(x)").unwrap_err();
        assert!(e.msg.contains("unknown macro"));
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse_formula("exists x. x = y /\\ emp").unwrap();
        match f {
            Formula::ExistsProg(x, body) => {
                assert_eq!(x, ProgVar::new("x"));
                assert!(matches!(*body, Formula::And(..)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
