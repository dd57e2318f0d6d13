//! Deciding the closed fragment: Boolean combinations of worms, clausal
//! normal form, and the provability verdict.
//!
//! Every closed formula is provably equivalent to a Boolean combination of
//! worms (`bcw`). The pipeline rewrites into the basis `{T, ~, &, <>, []}`,
//! pushes diamonds over disjuncts with `diamond_dnf`, and reads clauses
//! `A -> B1 | ... | Bk` off the negation's DNF. Provability then reduces to
//! a worm-order check per clause: the clause holds exactly when some
//! succedent is entailed by the antecedent, i.e. `normalize(worm_conj(A, Bj))
//! == normalize(A)`.
//!
//! These operations work on natural-token formulas (the hatted signature);
//! `decide`, `is_consistent`, and `zero_diamond_worm` accept any order and
//! relabel first when the tokens are not already naturals.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::order::{Modal, Order, OrderError};
use crate::reduction::{hat, ReductionError};
use crate::syntax::{worm_formula, Formula};
use crate::worm::{cmp_nf, normalize, worm_conj, worm_entails, NWorm, NormalWorm};

/// Errors raised by the closed-fragment pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosedError {
    #[error("formula contains the propositional variable {0:?}")]
    NotClosed(String),
    #[error("modal token {0:?} is not a natural number")]
    NotNatural(String),
    #[error("formula is not consistent")]
    Inconsistent,
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// One disjunct of a worm DNF: a conjunction of worms and negated worms.
/// No literals at all denotes `T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Disjunct {
    pub positives: Vec<NWorm>,
    pub negatives: Vec<NWorm>,
}

/// A Boolean combination of worms in disjunctive normal form. An empty
/// disjunct list denotes `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WormDnf {
    pub disjuncts: Vec<Disjunct>,
}

impl WormDnf {
    /// The DNF of `T`: one disjunct with no literals.
    pub fn top() -> WormDnf {
        WormDnf {
            disjuncts: vec![Disjunct::default()],
        }
    }

    /// The DNF of `F`: no disjuncts.
    pub fn bot() -> WormDnf {
        WormDnf {
            disjuncts: Vec::new(),
        }
    }

    /// Rebuild a formula denoting this DNF.
    pub fn to_formula(&self) -> Formula {
        Formula::disj_fold(
            self.disjuncts
                .iter()
                .map(|d| {
                    let mut parts: Vec<Formula> =
                        d.positives.iter().map(|w| nat_worm_formula(w)).collect();
                    parts.extend(
                        d.negatives
                            .iter()
                            .map(|w| Formula::not(nat_worm_formula(w))),
                    );
                    Formula::conj_fold(parts)
                })
                .collect(),
        )
    }
}

/// One clause `A -> B1 | ... | Bk` of the clausal form; an empty succedent
/// list denotes `A -> F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WormClause {
    pub antecedent: NormalWorm,
    pub succedents: Vec<NormalWorm>,
}

impl WormClause {
    /// Rebuild the formula `A -> B1 | ... | Bk`.
    pub fn to_formula(&self) -> Formula {
        Formula::imp(
            nat_worm_formula(self.antecedent.as_slice()),
            Formula::disj_fold(
                self.succedents
                    .iter()
                    .map(|b| nat_worm_formula(b.as_slice()))
                    .collect(),
            ),
        )
    }
}

/// Rebuild the conjunction of clauses as a formula.
pub fn clauses_to_formula(clauses: &[WormClause]) -> Formula {
    Formula::conj_fold(clauses.iter().map(WormClause::to_formula).collect())
}

/// The provability verdict; `witness` is the index of the first failing
/// clause when not provable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub provable: bool,
    pub witness: Option<usize>,
}

/// The worm formula `<a1>...<an>T` over natural tokens.
pub fn nat_worm_formula(w: &[u64]) -> Formula {
    let modals: Vec<Modal> = w
        .iter()
        .map(|e| Modal::new(e.to_string(), Order::Naturals.name()))
        .collect();
    worm_formula(&modals)
}

// ---------------------------------------------------------------------------
// Internal closed-formula representation over the basis {T, ~, &, <>, []}.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Cf {
    Top,
    Not(Box<Cf>),
    And(Box<Cf>, Box<Cf>),
    Dia(u64, Box<Cf>),
    Boxed(u64, Box<Cf>),
}

/// Eliminate `F`, `|`, `->` and check closedness and natural tokens.
fn to_cf(f: &Formula) -> Result<Cf, ClosedError> {
    Ok(match f {
        Formula::Top => Cf::Top,
        Formula::Bot => Cf::Not(Box::new(Cf::Top)),
        Formula::Var(name) => return Err(ClosedError::NotClosed(name.clone())),
        Formula::Not(g) => Cf::Not(Box::new(to_cf(g)?)),
        Formula::And(a, b) => Cf::And(Box::new(to_cf(a)?), Box::new(to_cf(b)?)),
        Formula::Or(a, b) => Cf::Not(Box::new(Cf::And(
            Box::new(Cf::Not(Box::new(to_cf(a)?))),
            Box::new(Cf::Not(Box::new(to_cf(b)?))),
        ))),
        Formula::Imp(a, b) => Cf::Not(Box::new(Cf::And(
            Box::new(to_cf(a)?),
            Box::new(Cf::Not(Box::new(to_cf(b)?))),
        ))),
        Formula::Box(m, g) => Cf::Boxed(nat_token(m)?, Box::new(to_cf(g)?)),
        Formula::Dia(m, g) => Cf::Dia(nat_token(m)?, Box::new(to_cf(g)?)),
    })
}

fn nat_token(m: &Modal) -> Result<u64, ClosedError> {
    m.token
        .parse()
        .map_err(|_| ClosedError::NotNatural(m.token.clone()))
}

// ---------------------------------------------------------------------------
// DNF algebra. Every worm stored in a DNF is in normal form, so structural
// equality of entries is equivalence and `contains` deduplicates soundly.
// ---------------------------------------------------------------------------

/// Conjoin two DNFs by distribution. Literals within a disjunct are kept
/// sorted and deduplicated, and duplicate disjuncts are dropped; since every
/// stored worm is normalized, structural duplication is semantic
/// duplication. This bounds the result by the literal universe rather than
/// the raw cross product, which matters under iterated negation.
/// Inconsistent disjuncts are kept: they surface as clauses whose
/// antecedent entails a succedent, which `decide` recognizes for free, and
/// dropping them here would hide clause structure from `formula_wnf`.
fn dnf_and(a: &WormDnf, b: &WormDnf) -> WormDnf {
    let mut out: Vec<Disjunct> = Vec::new();
    let mut seen: HashSet<Disjunct> = HashSet::new();
    for da in &a.disjuncts {
        for db in &b.disjuncts {
            let mut positives = da.positives.clone();
            positives.extend_from_slice(&db.positives);
            let mut negatives = da.negatives.clone();
            negatives.extend_from_slice(&db.negatives);
            let d = normal_disjunct(positives, negatives);
            if seen.insert(d.clone()) {
                out.push(d);
            }
        }
    }
    WormDnf { disjuncts: out }
}

/// Sort and deduplicate the literal lists of a disjunct.
fn normal_disjunct(mut positives: Vec<NWorm>, mut negatives: Vec<NWorm>) -> Disjunct {
    positives.sort();
    positives.dedup();
    negatives.sort();
    negatives.dedup();
    Disjunct {
        positives,
        negatives,
    }
}

/// The single worm equivalent to a conjunction of worms (empty list: `T`).
fn conj_fold_worms(worms: &[NWorm]) -> NWorm {
    let mut acc: NWorm = Vec::new();
    for w in worms {
        acc = worm_conj(&acc, w);
    }
    normalize(&acc).into_inner()
}

/// Negate a DNF and return the result in DNF again (De Morgan plus
/// distribution).
fn dnf_negate(d: &WormDnf) -> WormDnf {
    let mut acc = WormDnf::top();
    for disj in &d.disjuncts {
        let mut parts = Vec::new();
        for p in &disj.positives {
            parts.push(Disjunct {
                positives: Vec::new(),
                negatives: vec![p.clone()],
            });
        }
        for n in &disj.negatives {
            parts.push(Disjunct {
                positives: vec![n.clone()],
                negatives: Vec::new(),
            });
        }
        acc = dnf_and(&acc, &WormDnf { disjuncts: parts });
    }
    acc
}

/// Split a worm into its largest prefix with entries at least `alpha` and
/// the remainder (which is empty or starts below `alpha`).
fn split_level(w: &[u64], alpha: u64) -> (&[u64], &[u64]) {
    let cut = w
        .iter()
        .position(|&e| e < alpha)
        .unwrap_or(w.len());
    (&w[..cut], &w[cut..])
}

/// The DNF of `<alpha>d` for a DNF `d`.
///
/// Per disjunct: worms split at level `alpha`; the high positive parts
/// conjoin into a single worm `B`; a high negated part entailed by `B`
/// makes the disjunct `F`, and the remaining high negated parts drop out
/// entirely; low positive parts fold back into the diamond worm by worm
/// conjunction, while low negated parts pass outside untouched. A negated
/// worm with entries on both sides of `alpha` splits the disjunct in two
/// (one branch per half of its De Morgan dual).
pub fn diamond_dnf(alpha: u64, d: &WormDnf) -> WormDnf {
    let mut out = Vec::new();
    for disj in &d.disjuncts {
        let mut high_pos: Vec<NWorm> = Vec::new();
        let mut low_pos: Vec<NWorm> = Vec::new();
        for w in &disj.positives {
            let (h, l) = split_level(w, alpha);
            if !h.is_empty() {
                high_pos.push(normalize(h).into_inner());
            }
            if !l.is_empty() {
                low_pos.push(normalize(l).into_inner());
            }
        }
        let mut high_neg: Vec<NWorm> = Vec::new();
        let mut low_neg: Vec<NWorm> = Vec::new();
        let mut mixed: Vec<(NWorm, NWorm)> = Vec::new();
        for w in &disj.negatives {
            let (h, l) = split_level(w, alpha);
            match (h.is_empty(), l.is_empty()) {
                // Includes the negated empty worm, which `inconsistent`
                // catches below by `B` entailing it.
                (_, true) => high_neg.push(normalize(h).into_inner()),
                (true, false) => low_neg.push(normalize(l).into_inner()),
                (false, false) => {
                    mixed.push((normalize(h).into_inner(), normalize(l).into_inner()))
                }
            }
        }
        let b = conj_fold_worms(&high_pos);
        for choice in 0..1usize << mixed.len() {
            let mut hneg = high_neg.clone();
            let mut lneg = low_neg.clone();
            for (bit, (h, l)) in mixed.iter().enumerate() {
                if choice & (1 << bit) == 0 {
                    hneg.push(h.clone());
                } else {
                    lneg.push(l.clone());
                }
            }
            if hneg.iter().any(|n| worm_entails(&b, n)) {
                continue;
            }
            let mut worm = vec![alpha];
            worm.extend_from_slice(&b);
            for l in &low_pos {
                worm = worm_conj(&worm, l);
            }
            let worm = normalize(&worm).into_inner();
            out.push(normal_disjunct(vec![worm], lneg));
        }
    }
    WormDnf { disjuncts: out }
}

fn bcw_cf(cf: &Cf, memo: &mut HashMap<Cf, WormDnf>) -> WormDnf {
    if let Some(hit) = memo.get(cf) {
        return hit.clone();
    }
    let result = match cf {
        Cf::Top => WormDnf::top(),
        Cf::Not(g) => dnf_negate(&bcw_cf(g, memo)),
        Cf::And(a, b) => dnf_and(&bcw_cf(a, memo), &bcw_cf(b, memo)),
        Cf::Dia(m, g) => diamond_dnf(*m, &bcw_cf(g, memo)),
        Cf::Boxed(m, g) => {
            let dual = dnf_negate(&bcw_cf(g, memo));
            dnf_negate(&diamond_dnf(*m, &dual))
        }
    };
    memo.insert(cf.clone(), result.clone());
    result
}

/// The Boolean combination of worms equivalent to a closed natural-token
/// formula. Every worm in the result is normalized; the Boolean structure
/// itself is not canonical.
pub fn bcw(f: &Formula) -> Result<WormDnf, ClosedError> {
    let cf = to_cf(f)?;
    let mut memo = HashMap::new();
    Ok(bcw_cf(&cf, &mut memo))
}

/// The clausal normal form of a closed natural-token formula: clauses
/// `A -> B1 | ... | Bk` whose conjunction is equivalent to the formula.
/// Each disjunct of the negation's DNF yields one clause.
pub fn formula_wnf(f: &Formula) -> Result<Vec<WormClause>, ClosedError> {
    let cf = to_cf(f)?;
    let mut memo = HashMap::new();
    let negated = dnf_negate(&bcw_cf(&cf, &mut memo));
    Ok(negated
        .disjuncts
        .iter()
        .map(|d| {
            let antecedent = normalize(&conj_fold_worms(&d.positives));
            let mut succedents: Vec<NormalWorm> =
                d.negatives.iter().map(|n| normalize(n)).collect();
            succedents.dedup();
            WormClause {
                antecedent,
                succedents,
            }
        })
        .collect())
}

/// Relabel onto naturals when the order's tokens are not already natural
/// numbers; natural-token formulas are used verbatim.
fn naturalize(f: &Formula, order: &Order) -> Result<Formula, ClosedError> {
    check_provider(f, order)?;
    match order {
        Order::Naturals | Order::Finite(_) => Ok(f.clone()),
        _ => Ok(hat(f, order)?.formula),
    }
}

fn check_provider(f: &Formula, order: &Order) -> Result<(), ClosedError> {
    let expected = order.name();
    match f {
        Formula::Top | Formula::Bot | Formula::Var(_) => Ok(()),
        Formula::Not(g) => check_provider(g, order),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            check_provider(a, order)?;
            check_provider(b, order)
        }
        Formula::Box(m, g) | Formula::Dia(m, g) => {
            if m.provider != expected {
                return Err(ClosedError::Order(OrderError::ProviderMismatch {
                    token: m.token.clone(),
                    actual: m.provider.clone(),
                    expected,
                }));
            }
            check_provider(g, order)
        }
    }
}

/// Decide provability of a closed formula over the given order.
///
/// The formula is provable exactly when every clause of its clausal form
/// has a succedent entailed by its antecedent. A clause with no succedents
/// can never hold, because every worm is consistent.
pub fn decide(f: &Formula, order: &Order) -> Result<Verdict, ClosedError> {
    let nat = naturalize(f, order)?;
    let clauses = formula_wnf(&nat)?;
    for (i, clause) in clauses.iter().enumerate() {
        let a = clause.antecedent.as_slice();
        let holds = clause
            .succedents
            .iter()
            .any(|b| worm_entails(a, b.as_slice()));
        if !holds {
            return Ok(Verdict {
                provable: false,
                witness: Some(i),
            });
        }
    }
    Ok(Verdict {
        provable: true,
        witness: None,
    })
}

/// Consistency of a closed formula: its negation is not provable.
pub fn is_consistent(f: &Formula, order: &Order) -> Result<bool, ClosedError> {
    let verdict = decide(&Formula::not(f.clone()), order)?;
    Ok(!verdict.provable)
}

/// The single worm equivalent to `<0>f` for a consistent closed formula
/// `f` over natural tokens: prefix `0` to each disjunct of the Boolean
/// combination and keep the minimal resulting worm.
///
/// The worm uses modalities of `f` plus `0`, with `0` always present; the
/// construction cannot use anything else, though a modality of `f` may be
/// absorbed when the minimal disjunct does not involve it.
pub fn zero_diamond_worm(f: &Formula, order: &Order) -> Result<NWorm, ClosedError> {
    match order {
        Order::Naturals | Order::Finite(_) => {}
        other => {
            // The adjoined modality must be the genuine least natural; a
            // relabeled signature has no such token.
            return Err(ClosedError::NotNatural(other.name()));
        }
    }
    check_provider(f, order)?;
    if !is_consistent(f, order)? {
        return Err(ClosedError::Inconsistent);
    }
    let d = bcw(f)?;
    let prefixed = diamond_dnf(0, &d);
    let best = prefixed
        .disjuncts
        .iter()
        .map(|disj| {
            debug_assert_eq!(disj.positives.len(), 1);
            debug_assert!(disj.negatives.is_empty());
            &disj.positives[0]
        })
        .min_by(|a, b| cmp_nf(a, b))
        .expect("a consistent formula has a nonempty diamond DNF");
    Ok(best.clone())
}
