//! Finite frames for the auxiliary logic: validation, model checking, and
//! bounded countermodel search.
//!
//! A model carries one relation per modality index. The frame conditions
//! are, for every relation and every pair of indices `b < a`:
//!
//! 1. each relation is transitive and irreflexive (on a finite carrier this
//!    is exactly "conversely well-founded, transitive"),
//! 2. `x R_a y` implies that `x` and `y` see the same worlds through `R_b`,
//! 3. `x R_a y` and `y R_b z` imply `x R_a z`.
//!
//! There is no valuation: only closed formulas are checked. A modality with
//! no declared relation is interpreted by the empty relation, which makes
//! every `[m]` vacuously true there; adding empty relations preserves
//! validity, so this is the right completion.
//!
//! The countermodel search refutes the reduction target `N+(f^) -> f^` of a
//! formula over all frames up to a world bound, in a deterministic order. A
//! hit certifies unprovability of `f`; exhaustion proves nothing.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde_json::{json, Value};
use thiserror::Error;

use crate::order::Order;
use crate::reduction::{reduction_target, ReductionError};
use crate::syntax::Formula;

/// Hard cap on the number of worlds in enumerated frames.
pub const WORLD_CAP: usize = 5;

/// Cap on worlds in models loaded from JSON (bitmask-backed evaluation).
const MAX_LOADED_WORLDS: usize = 64;

/// Cap on the number of relations a model may declare.
const MAX_RELATIONS: usize = 64;

/// Errors raised by model construction, checking, and search.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("model has {0} worlds; at most {MAX_LOADED_WORLDS} are supported")]
    TooManyWorlds(usize),
    #[error("model declares relation index {0}; at most {MAX_RELATIONS} relations are supported")]
    TooManyRelations(u64),
    #[error("duplicate world name {0:?}")]
    DuplicateWorld(String),
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("formula contains the propositional variable {0:?}")]
    NotClosed(String),
    #[error("modal token {0:?} is not a natural number")]
    NotNatural(String),
    #[error("cannot parse model JSON: {0}")]
    BadJson(String),
    #[error("world bound {0} exceeds the hard cap {WORLD_CAP}")]
    CapExceeded(usize),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// A finite model: named worlds and one successor relation per modality
/// index, stored as per-world successor bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JModel {
    worlds: Vec<String>,
    /// `rels[m][x]` is the bitmask of `R_m`-successors of world `x`.
    rels: Vec<Vec<u64>>,
}

/// Which frame condition fails, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameViolation {
    /// Condition 1: `x R_m x`.
    Reflexive { rel: u64, x: String },
    /// Condition 1: `x R_m y R_m z` but not `x R_m z`.
    NotTransitive { rel: u64, x: String, y: String, z: String },
    /// Condition 2: `x R_higher y` but `z` is seen through `R_lower` by
    /// exactly one of `x` and `y`.
    ConeMismatch { higher: u64, lower: u64, x: String, y: String, z: String },
    /// Condition 3: `x R_higher y R_lower z` but not `x R_higher z`.
    NoLift { higher: u64, lower: u64, x: String, y: String, z: String },
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameViolation::Reflexive { rel, x } => {
                write!(f, "condition 1 fails: {x:?} R_{rel} {x:?} is reflexive")
            }
            FrameViolation::NotTransitive { rel, x, y, z } => write!(
                f,
                "condition 1 fails: {x:?} R_{rel} {y:?} R_{rel} {z:?} but not {x:?} R_{rel} {z:?}"
            ),
            FrameViolation::ConeMismatch { higher, lower, x, y, z } => write!(
                f,
                "condition 2 fails: {x:?} R_{higher} {y:?} but {z:?} is R_{lower}-seen by only one of them"
            ),
            FrameViolation::NoLift { higher, lower, x, y, z } => write!(
                f,
                "condition 3 fails: {x:?} R_{higher} {y:?} R_{lower} {z:?} but not {x:?} R_{higher} {z:?}"
            ),
        }
    }
}

/// Validity of a formula on a whole model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub valid: bool,
    /// A world falsifying the formula, present exactly when not valid.
    pub refuting_world: Option<String>,
}

/// Outcome of the bounded countermodel search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A model and world refuting the reduction target of the formula.
    Found { model: JModel, world: String },
    /// No countermodel within the bound; proves nothing by itself.
    NotFound,
}

impl JModel {
    /// Build a model from world names and `(relation index, edge list)`
    /// pairs given by world name. Checks structural integrity (unique
    /// names, known worlds, caps) but not the frame conditions; run
    /// `validate_frame` for those.
    pub fn new(
        worlds: Vec<String>,
        relations: &[(u64, Vec<(String, String)>)],
    ) -> Result<JModel, KripkeError> {
        if worlds.len() > MAX_LOADED_WORLDS {
            return Err(KripkeError::TooManyWorlds(worlds.len()));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, w) in worlds.iter().enumerate() {
            if index.insert(w.as_str(), i).is_some() {
                return Err(KripkeError::DuplicateWorld(w.clone()));
            }
        }
        let max_index = relations.iter().map(|(m, _)| *m).max();
        let count = match max_index {
            None => 0,
            Some(m) if m >= MAX_RELATIONS as u64 => {
                return Err(KripkeError::TooManyRelations(m));
            }
            Some(m) => m as usize + 1,
        };
        let mut rels = vec![vec![0u64; worlds.len()]; count];
        for (m, edges) in relations {
            for (from, to) in edges {
                let fi = *index
                    .get(from.as_str())
                    .ok_or_else(|| KripkeError::UnknownWorld(from.clone()))?;
                let ti = *index
                    .get(to.as_str())
                    .ok_or_else(|| KripkeError::UnknownWorld(to.clone()))?;
                rels[*m as usize][fi] |= 1u64 << ti;
            }
        }
        Ok(JModel { worlds, rels })
    }

    /// World names, in model order.
    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    /// Highest declared modality index, if any relation is declared.
    pub fn max_index(&self) -> Option<u64> {
        (!self.rels.is_empty()).then(|| self.rels.len() as u64 - 1)
    }

    fn world_index(&self, w: &str) -> Result<usize, KripkeError> {
        self.worlds
            .iter()
            .position(|name| name == w)
            .ok_or_else(|| KripkeError::UnknownWorld(w.to_string()))
    }

    fn all_mask(&self) -> u64 {
        match self.worlds.len() {
            64 => u64::MAX,
            n => (1u64 << n) - 1,
        }
    }

    /// Successor rows of the relation for a modality index, `None` when the
    /// index is beyond the declared relations (empty relation).
    fn rows(&self, m: u64) -> Option<&[u64]> {
        usize::try_from(m).ok().and_then(|i| self.rels.get(i)).map(Vec::as_slice)
    }

    /// Check the three frame conditions, returning the first violation in a
    /// deterministic scan order.
    pub fn validate_frame(&self) -> Result<(), FrameViolation> {
        let n = self.worlds.len();
        let name = |i: usize| self.worlds[i].clone();
        for (m, rel) in self.rels.iter().enumerate() {
            let m = m as u64;
            for x in 0..n {
                if rel[x] & (1 << x) != 0 {
                    return Err(FrameViolation::Reflexive { rel: m, x: name(x) });
                }
                for y in bits(rel[x]) {
                    let missing = rel[y] & !rel[x];
                    if missing != 0 {
                        let z = missing.trailing_zeros() as usize;
                        return Err(FrameViolation::NotTransitive {
                            rel: m,
                            x: name(x),
                            y: name(y),
                            z: name(z),
                        });
                    }
                }
            }
        }
        for hi in 1..self.rels.len() {
            for lo in 0..hi {
                let rhi = &self.rels[hi];
                let rlo = &self.rels[lo];
                for x in 0..n {
                    for y in bits(rhi[x]) {
                        let diff = rlo[x] ^ rlo[y];
                        if diff != 0 {
                            let z = diff.trailing_zeros() as usize;
                            return Err(FrameViolation::ConeMismatch {
                                higher: hi as u64,
                                lower: lo as u64,
                                x: name(x),
                                y: name(y),
                                z: name(z),
                            });
                        }
                        let unlifted = rlo[y] & !rhi[x];
                        if unlifted != 0 {
                            let z = unlifted.trailing_zeros() as usize;
                            return Err(FrameViolation::NoLift {
                                higher: hi as u64,
                                lower: lo as u64,
                                x: name(x),
                                y: name(y),
                                z: name(z),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The set of worlds satisfying a closed natural-token formula, as a
    /// bitmask over world indices.
    fn eval(&self, f: &Formula) -> Result<u64, KripkeError> {
        let all = self.all_mask();
        Ok(match f {
            Formula::Top => all,
            Formula::Bot => 0,
            Formula::Var(name) => return Err(KripkeError::NotClosed(name.clone())),
            Formula::Not(g) => !self.eval(g)? & all,
            Formula::And(a, b) => self.eval(a)? & self.eval(b)?,
            Formula::Or(a, b) => self.eval(a)? | self.eval(b)?,
            Formula::Imp(a, b) => (!self.eval(a)? | self.eval(b)?) & all,
            Formula::Box(m, g) | Formula::Dia(m, g) => {
                let idx: u64 = m
                    .token
                    .parse()
                    .map_err(|_| KripkeError::NotNatural(m.token.clone()))?;
                let sub = self.eval(g)?;
                let dia = matches!(f, Formula::Dia(..));
                let mut out = 0u64;
                if let Some(rows) = self.rows(idx) {
                    for (x, &row) in rows.iter().enumerate() {
                        let holds = if dia { row & sub != 0 } else { row & !sub == 0 };
                        if holds {
                            out |= 1 << x;
                        }
                    }
                } else if !dia {
                    // Undeclared relation: empty, so boxes hold everywhere.
                    out = all;
                }
                out
            }
        })
    }

    /// Truth of a closed formula at a named world.
    pub fn model_check(&self, w: &str, f: &Formula) -> Result<bool, KripkeError> {
        let i = self.world_index(w)?;
        Ok(self.eval(f)? & (1 << i) != 0)
    }

    /// Validity on every world; reports the first refuting world otherwise.
    pub fn is_valid_on(&self, f: &Formula) -> Result<CheckResult, KripkeError> {
        let sat = self.eval(f)?;
        let failing = !sat & self.all_mask();
        Ok(match first_bit(failing) {
            None => CheckResult {
                valid: true,
                refuting_world: None,
            },
            Some(i) => CheckResult {
                valid: false,
                refuting_world: Some(self.worlds[i].clone()),
            },
        })
    }

    /// Render as the model file format:
    /// `{"worlds":[...],"relations":{"0":[["x","y"],...],...}}`.
    pub fn to_json(&self) -> Value {
        let mut relations = serde_json::Map::new();
        for (m, rel) in self.rels.iter().enumerate() {
            let mut pairs = Vec::new();
            for (x, &row) in rel.iter().enumerate() {
                for y in bits(row) {
                    pairs.push(json!([self.worlds[x], self.worlds[y]]));
                }
            }
            relations.insert(m.to_string(), Value::Array(pairs));
        }
        json!({"worlds": self.worlds, "relations": relations})
    }

    /// Parse the model file format produced by `to_json`.
    pub fn from_json(v: &Value) -> Result<JModel, KripkeError> {
        let bad = |msg: &str| KripkeError::BadJson(msg.to_string());
        let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
        for key in obj.keys() {
            if key != "worlds" && key != "relations" {
                return Err(bad(&format!("unexpected key {key:?}")));
            }
        }
        let worlds_v = obj.get("worlds").ok_or_else(|| bad("missing \"worlds\""))?;
        let worlds: Vec<String> = worlds_v
            .as_array()
            .ok_or_else(|| bad("\"worlds\" must be an array"))?
            .iter()
            .map(|w| {
                w.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| bad("world names must be strings"))
            })
            .collect::<Result<_, _>>()?;
        let mut relations: Vec<(u64, Vec<(String, String)>)> = Vec::new();
        if let Some(rel_v) = obj.get("relations") {
            let rel_obj = rel_v
                .as_object()
                .ok_or_else(|| bad("\"relations\" must be an object"))?;
            for (key, pairs_v) in rel_obj {
                let m: u64 = key
                    .parse()
                    .map_err(|_| bad(&format!("relation key {key:?} is not a natural number")))?;
                let pairs_arr = pairs_v
                    .as_array()
                    .ok_or_else(|| bad("each relation must be an array of pairs"))?;
                let mut pairs = Vec::with_capacity(pairs_arr.len());
                for p in pairs_arr {
                    let pair = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                        bad("each edge must be a two-element array of world names")
                    })?;
                    let from = pair[0]
                        .as_str()
                        .ok_or_else(|| bad("edge endpoints must be strings"))?;
                    let to = pair[1]
                        .as_str()
                        .ok_or_else(|| bad("edge endpoints must be strings"))?;
                    pairs.push((from.to_string(), to.to_string()));
                }
                relations.push((m, pairs));
            }
        }
        JModel::new(worlds, &relations)
    }

    /// Parse the model file format from text.
    pub fn from_json_str(s: &str) -> Result<JModel, KripkeError> {
        let v: Value =
            serde_json::from_str(s).map_err(|e| KripkeError::BadJson(e.to_string()))?;
        JModel::from_json(&v)
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

fn first_bit(mask: u64) -> Option<usize> {
    (mask != 0).then(|| mask.trailing_zeros() as usize)
}

/// All transitive irreflexive relations on `n` labeled worlds, each encoded
/// as an `n*n` row-major adjacency bitmask, ascending. Cached per `n`.
fn posets(n: usize) -> &'static [u32] {
    const INIT: OnceLock<Vec<u32>> = OnceLock::new();
    static CACHE: [OnceLock<Vec<u32>>; WORLD_CAP + 1] = [INIT; WORLD_CAP + 1];
    CACHE[n].get_or_init(|| {
        let mut out = Vec::new();
        let cells = n * n;
        let diagonal: u32 = (0..n).map(|i| 1u32 << (i * n + i)).sum();
        'mask: for mask in 0..1u32 << cells {
            if mask & diagonal != 0 {
                continue;
            }
            let row = |i: usize| (mask >> (i * n)) & ((1u32 << n) - 1);
            for i in 0..n {
                for j in bits(row(i) as u64) {
                    if row(j) & !row(i) != 0 {
                        continue 'mask;
                    }
                }
            }
            out.push(mask);
        }
        out
    })
}

/// Do a lower relation and a higher relation satisfy the two bridging
/// conditions on `n` worlds?
fn bridge_ok(n: usize, lo: u32, hi: u32) -> bool {
    let row = |rel: u32, i: usize| (rel >> (i * n)) & ((1u32 << n) - 1);
    for x in 0..n {
        for y in bits(row(hi, x) as u64) {
            if row(lo, x) != row(lo, y) {
                return false;
            }
            if row(lo, y) & !row(hi, x) != 0 {
                return false;
            }
        }
    }
    true
}

/// Deterministic stream of all valid models on exactly `n_worlds` labeled
/// worlds (named `w0`, `w1`, ...) with relations `0..=max_index`.
pub struct FrameIter {
    n: usize,
    count: usize,
    posets: &'static [u32],
    /// Odometer over poset indices, one per relation; empty before start.
    idx: Vec<usize>,
    done: bool,
}

impl FrameIter {
    fn prefix_ok(&self, level: usize) -> bool {
        let hi = self.posets[self.idx[level]];
        (0..level).all(|lo| bridge_ok(self.n, self.posets[self.idx[lo]], hi))
    }

    fn advance(&mut self) -> bool {
        let mut level;
        if self.idx.is_empty() {
            self.idx.push(0);
            level = 0;
        } else {
            level = self.count - 1;
            self.idx[level] += 1;
        }
        loop {
            if self.idx[level] >= self.posets.len() {
                if level == 0 {
                    return false;
                }
                self.idx.pop();
                level -= 1;
                self.idx[level] += 1;
                continue;
            }
            if self.prefix_ok(level) {
                if level + 1 == self.count {
                    return true;
                }
                level += 1;
                self.idx.push(0);
            } else {
                self.idx[level] += 1;
            }
        }
    }

    fn current(&self) -> JModel {
        let worlds = (0..self.n).map(|i| format!("w{i}")).collect();
        let rels = self
            .idx
            .iter()
            .map(|&pi| {
                let mask = self.posets[pi];
                (0..self.n)
                    .map(|i| u64::from((mask >> (i * self.n)) & ((1u32 << self.n) - 1)))
                    .collect()
            })
            .collect();
        JModel { worlds, rels }
    }
}

impl Iterator for FrameIter {
    type Item = JModel;

    fn next(&mut self) -> Option<JModel> {
        if self.done {
            return None;
        }
        if self.n == 0 || !self.advance() {
            self.done = true;
            return None;
        }
        Some(self.current())
    }
}

/// Enumerate every valid model on exactly `n_worlds` labeled worlds with
/// relations `0..=max_index`, in a fixed deterministic order.
pub fn enumerate_frames(n_worlds: usize, max_index: u64) -> Result<FrameIter, KripkeError> {
    if n_worlds > WORLD_CAP {
        return Err(KripkeError::CapExceeded(n_worlds));
    }
    if max_index >= MAX_RELATIONS as u64 {
        return Err(KripkeError::TooManyRelations(max_index));
    }
    Ok(FrameIter {
        n: n_worlds,
        count: max_index as usize + 1,
        posets: posets(n_worlds),
        idx: Vec::new(),
        done: false,
    })
}

/// Search all models with at most `max_worlds` worlds for one refuting the
/// reduction target of `f`. A hit certifies that `f` is not provable; the
/// first hit in the deterministic enumeration order is returned.
pub fn countermodel_search(
    f: &Formula,
    order: &Order,
    max_worlds: usize,
) -> Result<SearchOutcome, KripkeError> {
    if let Some(name) = first_var(f) {
        return Err(KripkeError::NotClosed(name));
    }
    if max_worlds > WORLD_CAP {
        return Err(KripkeError::CapExceeded(max_worlds));
    }
    let target = reduction_target(f, order)?;
    let max_index = target.map.len().saturating_sub(1) as u64;
    for n in 1..=max_worlds {
        for model in enumerate_frames(n, max_index)? {
            let result = model.is_valid_on(&target.formula)?;
            if let Some(world) = result.refuting_world {
                return Ok(SearchOutcome::Found { model, world });
            }
        }
    }
    Ok(SearchOutcome::NotFound)
}

fn first_var(f: &Formula) -> Option<String> {
    match f {
        Formula::Top | Formula::Bot => None,
        Formula::Var(name) => Some(name.clone()),
        Formula::Not(g) | Formula::Box(_, g) | Formula::Dia(_, g) => first_var(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            first_var(a).or_else(|| first_var(b))
        }
    }
}
