//! Formula syntax: AST, parser, printer, and the worm view.
//!
//! The concrete grammar (whitespace insensitive):
//!
//! ```text
//! formula := imp
//! imp     := or ('->' imp)?            right associative
//! or      := and ('|' and)*
//! and     := unary ('&' unary)*
//! unary   := '~' unary | '[' token ']' unary | '<' token '>' unary | atom
//! atom    := 'T' | 'F' | var | '(' formula ')'
//! var     := [a-z][a-z0-9_]*
//! ```
//!
//! Precedence is `~` (and modalities) over `&` over `|` over `->`. Modal
//! tokens are read verbatim up to the closing bracket and canonicalized by
//! the active order, so `[007]p` and `[7]p` parse to the same formula.

use std::fmt::Write as _;

use thiserror::Error;

use crate::order::{Modal, Order};

/// Errors raised by parsing and by the worm view.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    /// The input text is not a formula of the grammar.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    /// The formula is not of the shape `<a1>...<an>T`.
    #[error("formula is not a worm")]
    NotAWorm,
}

/// A modal formula. Connectives beyond the primitive basis are first-class
/// so parsing and printing are faithful to the input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bot,
    Var(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Box(Modal, Box<Formula>),
    Dia(Modal, Box<Formula>),
}

/// A worm over an arbitrary order: the modality tokens of `<a1>...<an>T`,
/// left to right. The empty worm is `T`.
pub type Worm = Vec<Modal>;

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }
    pub fn boxed(m: Modal, f: Formula) -> Formula {
        Formula::Box(m, Box::new(f))
    }
    pub fn dia(m: Modal, f: Formula) -> Formula {
        Formula::Dia(m, Box::new(f))
    }

    /// Fold a slice of conjuncts: empty to `T`, singleton to itself,
    /// otherwise a left-nested conjunction.
    pub fn conj_fold(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::Top,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Fold a slice of disjuncts: empty to `F`, singleton to itself,
    /// otherwise a left-nested disjunction.
    pub fn disj_fold(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::Bot,
            Some(first) => it.fold(first, Formula::or),
        }
    }
}

/// Parse a formula, canonicalizing modal tokens with the given order.
pub fn parse(text: &str, order: &Order) -> Result<Formula, SyntaxError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        order,
    };
    p.skip_ws();
    let f = p.imp()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    order: &'a Order,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn imp(&mut self) -> Result<Formula, SyntaxError> {
        let left = self.or()?;
        self.skip_ws();
        if self.peek() == Some(b'-') {
            if self.bytes.get(self.pos + 1) != Some(&b'>') {
                return Err(self.err("expected '->'"));
            }
            self.pos += 2;
            self.skip_ws();
            let right = self.imp()?;
            return Ok(Formula::imp(left, right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut left = self.and()?;
        loop {
            self.skip_ws();
            if self.eat(b'|') {
                self.skip_ws();
                let right = self.and()?;
                left = Formula::or(left, right);
            } else {
                return Ok(left);
            }
        }
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut left = self.unary()?;
        loop {
            self.skip_ws();
            if self.eat(b'&') {
                self.skip_ws();
                let right = self.unary()?;
                left = Formula::and(left, right);
            } else {
                return Ok(left);
            }
        }
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(b'~') => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(b'[') => {
                let m = self.modal_token(b'[', b']')?;
                Ok(Formula::boxed(m, self.unary()?))
            }
            Some(b'<') => {
                let m = self.modal_token(b'<', b'>')?;
                Ok(Formula::dia(m, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn modal_token(&mut self, open: u8, close: u8) -> Result<Modal, SyntaxError> {
        debug_assert_eq!(self.peek(), Some(open));
        self.pos += 1;
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b == close {
                let raw = std::str::from_utf8(&self.bytes[start..self.pos])
                    .map_err(|_| self.err("modal token is not valid UTF-8"))?;
                let modal = self.order.modal(raw).map_err(|e| SyntaxError::Parse {
                    pos: start,
                    msg: e.to_string(),
                })?;
                self.pos += 1;
                return Ok(modal);
            }
            self.pos += 1;
        }
        Err(self.err(format!("unclosed modal bracket '{}'", open as char)))
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(b'T') => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(b'F') => {
                self.pos += 1;
                Ok(Formula::Bot)
            }
            Some(b'(') => {
                self.pos += 1;
                let f = self.imp()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(f)
            }
            Some(b) if b.is_ascii_lowercase() => {
                let start = self.pos;
                self.pos += 1;
                while matches!(self.peek(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos])
                    .expect("ascii range")
                    .to_string();
                Ok(Formula::Var(name))
            }
            Some(_) => Err(self.err("expected a formula")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Print a formula in canonical concrete syntax. `parse(print(f)) == f`
/// whenever the modal tokens are canonical for the order used to parse.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    print_prec(f, 1, &mut out);
    out
}

// Precedence levels: -> is 1, | is 2, & is 3, unary is 4.
fn print_prec(f: &Formula, min: u8, out: &mut String) {
    let prec = match f {
        Formula::Imp(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(..) | Formula::Box(..) | Formula::Dia(..) => 4,
        Formula::Top | Formula::Bot | Formula::Var(_) => 5,
    };
    let parens = prec < min;
    if parens {
        out.push('(');
    }
    match f {
        Formula::Top => out.push('T'),
        Formula::Bot => out.push('F'),
        Formula::Var(name) => out.push_str(name),
        Formula::Not(g) => {
            out.push('~');
            print_prec(g, 4, out);
        }
        Formula::Box(m, g) => {
            let _ = write!(out, "[{}]", m.token);
            print_prec(g, 4, out);
        }
        Formula::Dia(m, g) => {
            let _ = write!(out, "<{}>", m.token);
            print_prec(g, 4, out);
        }
        Formula::And(a, b) => {
            print_prec(a, 3, out);
            out.push_str(" & ");
            print_prec(b, 4, out);
        }
        Formula::Or(a, b) => {
            print_prec(a, 2, out);
            out.push_str(" | ");
            print_prec(b, 3, out);
        }
        Formula::Imp(a, b) => {
            print_prec(a, 2, out);
            out.push_str(" -> ");
            print_prec(b, 1, out);
        }
    }
    if parens {
        out.push(')');
    }
}

/// View a formula as a worm `<a1>...<an>T`. The empty worm is `T`.
pub fn as_worm(f: &Formula) -> Result<Worm, SyntaxError> {
    let mut entries = Vec::new();
    let mut cur = f;
    loop {
        match cur {
            Formula::Top => return Ok(entries),
            Formula::Dia(m, rest) => {
                entries.push(m.clone());
                cur = rest;
            }
            _ => return Err(SyntaxError::NotAWorm),
        }
    }
}

/// Build the worm formula `<a1>...<an>T` from its entries.
pub fn worm_formula(entries: &[Modal]) -> Formula {
    let mut f = Formula::Top;
    for m in entries.iter().rev() {
        f = Formula::dia(m.clone(), f);
    }
    f
}

/// True when the formula contains no propositional variables.
pub fn is_closed(f: &Formula) -> bool {
    match f {
        Formula::Top | Formula::Bot => true,
        Formula::Var(_) => false,
        Formula::Not(g) | Formula::Box(_, g) | Formula::Dia(_, g) => is_closed(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            is_closed(a) && is_closed(b)
        }
    }
}

/// Symbol count of a formula: one per connective, modality, and atom.
/// This is the length measure used by the DNF-conversion guard.
pub fn symbol_count(f: &Formula) -> usize {
    match f {
        Formula::Top | Formula::Bot | Formula::Var(_) => 1,
        Formula::Not(g) | Formula::Box(_, g) | Formula::Dia(_, g) => 1 + symbol_count(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            1 + symbol_count(a) + symbol_count(b)
        }
    }
}

/// JSON rendering of the AST: `{"kind": ..., "modal"?: ..., "name"?: ...,
/// "children"?: [...]}`.
pub fn formula_to_json(f: &Formula) -> serde_json::Value {
    use serde_json::json;
    match f {
        Formula::Top => json!({"kind": "top"}),
        Formula::Bot => json!({"kind": "bot"}),
        Formula::Var(name) => json!({"kind": "var", "name": name}),
        Formula::Not(g) => json!({"kind": "not", "children": [formula_to_json(g)]}),
        Formula::And(a, b) => {
            json!({"kind": "and", "children": [formula_to_json(a), formula_to_json(b)]})
        }
        Formula::Or(a, b) => {
            json!({"kind": "or", "children": [formula_to_json(a), formula_to_json(b)]})
        }
        Formula::Imp(a, b) => {
            json!({"kind": "imp", "children": [formula_to_json(a), formula_to_json(b)]})
        }
        Formula::Box(m, g) => {
            json!({"kind": "box", "modal": m.token, "children": [formula_to_json(g)]})
        }
        Formula::Dia(m, g) => {
            json!({"kind": "dia", "modal": m.token, "children": [formula_to_json(g)]})
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega() -> Order {
        Order::Naturals
    }

    fn p(text: &str) -> Formula {
        parse(text, &omega()).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        // & binds tighter than |, which binds tighter than ->.
        assert_eq!(p("a & b | c"), Formula::or(Formula::and(p("a"), p("b")), p("c")));
        assert_eq!(p("a | b -> c"), Formula::imp(Formula::or(p("a"), p("b")), p("c")));
        // -> is right associative.
        assert_eq!(p("a -> b -> c"), Formula::imp(p("a"), Formula::imp(p("b"), p("c"))));
        // Modalities bind like negation.
        assert_eq!(p("[1]a & b"), Formula::and(p("[1]a"), p("b")));
        assert_eq!(p("~a & b"), Formula::and(p("~a"), p("b")));
    }

    #[test]
    fn modal_tokens_are_canonicalized() {
        assert_eq!(p("[007]x"), p("[7]x"));
        let int = Order::Integers;
        assert_eq!(parse("<-05>T", &int).unwrap(), parse("<-5>T", &int).unwrap());
        assert!(parse("<-5>T", &omega()).is_err());
        assert!(parse("[2]p", &Order::Finite(2)).is_err());
    }

    #[test]
    fn parse_errors_report_position() {
        for text in ["", "a &", "(a", "[1", "a b", "A", "~", "a -< b"] {
            assert!(parse(text, &omega()).is_err(), "accepted {text:?}");
        }
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "T",
            "F",
            "x",
            "foo_1",
            "~<0>T",
            "<0><1>T -> <0>T",
            "(a -> b) -> c",
            "a -> b -> c",
            "a & (b | c)",
            "(a | b) & c",
            "~(a & b)",
            "[1](a -> b)",
            "<0>T & <1>T | c",
            "[0]F",
        ] {
            let f = p(text);
            let printed = print(&f);
            assert_eq!(p(&printed), f, "round trip failed for {text:?} -> {printed:?}");
        }
    }

    #[test]
    fn worm_view() {
        let f = p("<0><1>T");
        let w = as_worm(&f).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].token, "0");
        assert_eq!(w[1].token, "1");
        assert_eq!(worm_formula(&w), f);
        assert_eq!(as_worm(&p("T")).unwrap(), Vec::new());
        assert!(as_worm(&p("<0>F")).is_err());
        assert!(as_worm(&p("[0]T")).is_err());
    }

    #[test]
    fn closedness_and_symbol_count() {
        assert!(is_closed(&p("<0>T -> [1]F")));
        assert!(!is_closed(&p("<0>x")));
        assert_eq!(symbol_count(&p("<0>T")), 2);
        assert_eq!(symbol_count(&p("a -> b -> c")), 5);
    }

    #[test]
    fn json_shape() {
        let v = formula_to_json(&p("<0>T"));
        assert_eq!(v["kind"], "dia");
        assert_eq!(v["modal"], "0");
        assert_eq!(v["children"][0]["kind"], "top");
    }
}
