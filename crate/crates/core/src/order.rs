//! Pluggable linear orders of modalities.
//!
//! Every modality in a formula is a token drawn from some linear order. The
//! engine never looks inside a token: all it ever needs is the ability to
//! canonicalize tokens at parse time and to compare two tokens from the same
//! order. This module provides the built-in orders (bounded initial segments
//! of the naturals, the naturals, the integers, and lexicographic pairs) and
//! the signature machinery that maps the finitely many modalities occurring
//! in a formula onto an initial segment of the naturals.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::syntax::Formula;

/// Errors raised by token parsing and modality comparison.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    /// A token could not be parsed as an element of the order.
    #[error("cannot parse {text:?} as a token of order {order}: {reason}")]
    BadToken {
        text: String,
        order: String,
        reason: String,
    },
    /// A modality was used with an order it does not belong to.
    #[error("modal {token:?} belongs to order {actual}, not {expected}")]
    ProviderMismatch {
        token: String,
        actual: String,
        expected: String,
    },
    /// An order specification string (for example on the command line) was malformed.
    #[error("bad order spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
}

/// A modality: a canonical token together with the name of the order it
/// belongs to. Tokens are canonicalized when parsed, so equality of modalities
/// is plain field equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Modal {
    /// Canonical token text, e.g. `"7"`, `"-5"`, `"(1,0)"`.
    pub token: String,
    /// Name of the owning order, e.g. `"omega"`, `"int"`, `"finite:4"`.
    pub provider: String,
}

impl Modal {
    pub fn new(token: impl Into<String>, provider: impl Into<String>) -> Self {
        Modal {
            token: token.into(),
            provider: provider.into(),
        }
    }
}

impl fmt::Display for Modal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token)
    }
}

/// A linear order whose elements are written as string tokens.
///
/// The built-in orders are:
///
/// * `finite:N` - the naturals `0..N-1`,
/// * `omega` - the naturals (tokens up to `u64::MAX`),
/// * `int` - the integers (tokens within `i64`),
/// * `lexpair:<o1>,<o2>` - pairs `(a,b)` ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Order {
    /// The finite order `{0, 1, ..., n-1}`.
    Finite(u64),
    /// The natural numbers.
    Naturals,
    /// The integers.
    Integers,
    /// Lexicographically ordered pairs over two component orders.
    LexPair(Box<Order>, Box<Order>),
}

impl Order {
    /// The name of the order, as used in order specs and in `Modal::provider`.
    pub fn name(&self) -> String {
        match self {
            Order::Finite(n) => format!("finite:{n}"),
            Order::Naturals => "omega".to_string(),
            Order::Integers => "int".to_string(),
            Order::LexPair(a, b) => format!("lexpair:{},{}", a.name(), b.name()),
        }
    }

    /// Parse an order specification string: `finite:N`, `omega`, `int`, or
    /// `lexpair:<o1>,<o2>` where the components are non-pair orders.
    pub fn parse_spec(spec: &str) -> Result<Order, OrderError> {
        let bad = |reason: &str| OrderError::BadSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let spec = spec.trim();
        if spec == "omega" {
            return Ok(Order::Naturals);
        }
        if spec == "int" {
            return Ok(Order::Integers);
        }
        if let Some(count) = spec.strip_prefix("finite:") {
            let n: u64 = count
                .parse()
                .map_err(|_| bad("expected finite:N with N a natural number"))?;
            if n == 0 {
                return Err(bad("finite order must have at least one element"));
            }
            return Ok(Order::Finite(n));
        }
        if let Some(rest) = spec.strip_prefix("lexpair:") {
            let (left, right) = rest
                .split_once(',')
                .ok_or_else(|| bad("expected lexpair:<order>,<order>"))?;
            if left.starts_with("lexpair:") || right.starts_with("lexpair:") {
                return Err(bad("lexpair components must be finite:N, omega, or int"));
            }
            let a = Order::parse_spec(left)?;
            let b = Order::parse_spec(right)?;
            return Ok(Order::LexPair(Box::new(a), Box::new(b)));
        }
        Err(bad("expected finite:N, omega, int, or lexpair:<o1>,<o2>"))
    }

    /// Canonicalize a raw token (strip leading zeros, normalize signs, strip
    /// whitespace around pair components). The result is the unique spelling
    /// used for equality, so `Modal` comparison is plain string comparison.
    pub fn canonicalize(&self, raw: &str) -> Result<String, OrderError> {
        let bad = |reason: String| OrderError::BadToken {
            text: raw.to_string(),
            order: self.name(),
            reason,
        };
        let trimmed = raw.trim();
        match self {
            Order::Finite(n) => {
                let v = parse_natural(trimmed)
                    .map_err(|reason| bad(reason))?;
                if v >= *n {
                    return Err(bad(format!("token must be below {n}")));
                }
                Ok(v.to_string())
            }
            Order::Naturals => {
                let v = parse_natural(trimmed).map_err(|reason| bad(reason))?;
                Ok(v.to_string())
            }
            Order::Integers => {
                let v = parse_integer(trimmed).map_err(|reason| bad(reason))?;
                Ok(v.to_string())
            }
            Order::LexPair(a, b) => {
                let inner = trimmed
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| bad("expected (left,right)".to_string()))?;
                let (l, r) = split_pair(inner)
                    .ok_or_else(|| bad("expected (left,right)".to_string()))?;
                let l = a.canonicalize(l)?;
                let r = b.canonicalize(r)?;
                Ok(format!("({l},{r})"))
            }
        }
    }

    /// Parse a raw token into a `Modal` belonging to this order.
    pub fn modal(&self, raw: &str) -> Result<Modal, OrderError> {
        Ok(Modal::new(self.canonicalize(raw)?, self.name()))
    }

    /// Compare two tokens of this order. Raw (non-canonical) spellings are
    /// accepted and canonicalized first.
    pub fn compare_tokens(&self, a: &str, b: &str) -> Result<Ordering, OrderError> {
        match self {
            Order::Finite(_) | Order::Naturals => {
                let ca = self.canonicalize(a)?;
                let cb = self.canonicalize(b)?;
                let va: u64 = ca.parse().expect("canonical natural token");
                let vb: u64 = cb.parse().expect("canonical natural token");
                Ok(va.cmp(&vb))
            }
            Order::Integers => {
                let va: i64 = self.canonicalize(a)?.parse().expect("canonical integer token");
                let vb: i64 = self.canonicalize(b)?.parse().expect("canonical integer token");
                Ok(va.cmp(&vb))
            }
            Order::LexPair(oa, ob) => {
                let ca = self.canonicalize(a)?;
                let cb = self.canonicalize(b)?;
                let (a1, a2) = split_pair(ca.strip_prefix('(').unwrap().strip_suffix(')').unwrap())
                    .expect("canonical pair token");
                let (b1, b2) = split_pair(cb.strip_prefix('(').unwrap().strip_suffix(')').unwrap())
                    .expect("canonical pair token");
                match oa.compare_tokens(a1, b1)? {
                    Ordering::Equal => ob.compare_tokens(a2, b2),
                    other => Ok(other),
                }
            }
        }
    }
}

/// Compare two modalities under an order, checking that both belong to it.
pub fn compare_modals(order: &Order, a: &Modal, b: &Modal) -> Result<Ordering, OrderError> {
    let expected = order.name();
    for m in [a, b] {
        if m.provider != expected {
            return Err(OrderError::ProviderMismatch {
                token: m.token.clone(),
                actual: m.provider.clone(),
                expected: expected.clone(),
            });
        }
    }
    order.compare_tokens(&a.token, &b.token)
}

fn parse_natural(s: &str) -> Result<u64, String> {
    if s.is_empty() {
        return Err("empty token".to_string());
    }
    if !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err("expected decimal digits".to_string());
    }
    s.parse::<u64>().map_err(|_| "token out of range".to_string())
}

fn parse_integer(s: &str) -> Result<i64, String> {
    if s.is_empty() {
        return Err("empty token".to_string());
    }
    let (sign, digits) = match s.as_bytes()[0] {
        b'-' => (-1i64, &s[1..]),
        b'+' => (1, &s[1..]),
        _ => (1, s),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err("expected an optional sign and decimal digits".to_string());
    }
    let mag: i64 = digits.parse().map_err(|_| "token out of range".to_string())?;
    Ok(sign * mag)
}

/// Split `"a,b"` at the top-level comma, respecting parenthesized components.
fn split_pair(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

/// The modalities of a formula, sorted ascending in the order and deduplicated.
/// Position in the signature is the hat index of the modality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureMap {
    elements: Vec<Modal>,
}

impl SignatureMap {
    /// Build a signature from an arbitrary modality collection.
    pub fn from_modals(order: &Order, modals: &[Modal]) -> Result<SignatureMap, OrderError> {
        let mut elements: Vec<Modal> = Vec::new();
        for m in modals {
            if !elements.contains(m) {
                elements.push(m.clone());
            }
        }
        // Sort by the order; comparisons can fail on provider mismatch, so
        // check every element against the order up front.
        for m in &elements {
            compare_modals(order, m, m)?;
        }
        elements.sort_by(|a, b| {
            order
                .compare_tokens(&a.token, &b.token)
                .expect("tokens validated above")
        });
        Ok(SignatureMap { elements })
    }

    /// The hat index of a modality, if it occurs in the signature.
    pub fn index_of(&self, m: &Modal) -> Option<usize> {
        self.elements.iter().position(|e| e == m)
    }

    /// The modality at a hat index.
    pub fn modal_at(&self, index: usize) -> Option<&Modal> {
        self.elements.get(index)
    }

    /// Number of distinct modalities.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The modalities in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = &Modal> {
        self.elements.iter()
    }
}

/// The signature of a formula: its modalities sorted ascending and
/// deduplicated. This is the order isomorphism underlying relabeling.
pub fn signature_of(f: &Formula, order: &Order) -> Result<SignatureMap, OrderError> {
    let mut modals = Vec::new();
    collect_modals(f, &mut modals);
    SignatureMap::from_modals(order, &modals)
}

fn collect_modals(f: &Formula, out: &mut Vec<Modal>) {
    match f {
        Formula::Top | Formula::Bot | Formula::Var(_) => {}
        Formula::Not(g) => collect_modals(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            collect_modals(a, out);
            collect_modals(b, out);
        }
        Formula::Box(m, g) | Formula::Dia(m, g) => {
            out.push(m.clone());
            collect_modals(g, out);
        }
    }
}
