//! Reduction of provability over an arbitrary order to provability over an
//! initial segment of the naturals, and from there to the auxiliary logic
//! with weakened monotonicity that has finite countermodels.
//!
//! `hat` relabels the finitely many modalities of a formula onto
//! `0..n-1` through the order isomorphism given by sorting the signature.
//! Provability is invariant under this relabeling, which is what makes the
//! engine independent of the particular order.
//!
//! `n_plus` and `m_plus` build the monotonicity conjunctions over the boxed
//! subformulas of a natural-token formula. A formula is provable in the full
//! logic exactly when `N+(f) -> f` (equivalently `M+(f) -> f`) is provable
//! in the auxiliary logic, and the latter has the finite model property, so
//! `reduction_target` is what the countermodel search refutes.

use thiserror::Error;

use crate::order::{signature_of, Modal, Order, OrderError, SignatureMap};
use crate::syntax::{print, Formula};

/// Errors raised by relabeling and the uniformizers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Order(#[from] OrderError),
    /// An operation needed natural-number tokens but found something else.
    #[error("modal token {0:?} is not a natural number")]
    NotNatural(String),
    /// A hatted formula mentions an index outside its signature map.
    #[error("hat index {0} is outside the signature map")]
    IndexOutOfRange(usize),
}

/// A formula relabeled onto the initial segment `0..map.len()` of the
/// naturals, together with the signature map that undoes the relabeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HattedFormula {
    /// The relabeled formula; its tokens are decimal hat indices.
    pub formula: Formula,
    /// Position `i` holds the original modality with hat index `i`.
    pub map: SignatureMap,
}

/// Relabel the modalities of `f` onto `0..n-1`, preserving their relative
/// order. The result is a formula over the naturals with the same
/// provability status as `f`.
pub fn hat(f: &Formula, order: &Order) -> Result<HattedFormula, ReductionError> {
    let map = signature_of(f, order)?;
    let formula = relabel(f, &|m| {
        let idx = map.index_of(m).expect("signature contains every modality");
        Modal::new(idx.to_string(), Order::Naturals.name())
    });
    Ok(HattedFormula { formula, map })
}

/// Undo a relabeling, restoring the original modalities.
pub fn unhat(h: &HattedFormula) -> Result<Formula, ReductionError> {
    try_relabel(&h.formula, &|m| {
        let idx: usize = m
            .token
            .parse()
            .map_err(|_| ReductionError::NotNatural(m.token.clone()))?;
        h.map
            .modal_at(idx)
            .cloned()
            .ok_or(ReductionError::IndexOutOfRange(idx))
    })
}

fn relabel(f: &Formula, subst: &impl Fn(&Modal) -> Modal) -> Formula {
    try_relabel::<std::convert::Infallible>(f, &|m| Ok(subst(m))).unwrap()
}

fn try_relabel<E>(f: &Formula, subst: &impl Fn(&Modal) -> Result<Modal, E>) -> Result<Formula, E> {
    Ok(match f {
        Formula::Top | Formula::Bot | Formula::Var(_) => f.clone(),
        Formula::Not(g) => Formula::not(try_relabel(g, subst)?),
        Formula::And(a, b) => Formula::and(try_relabel(a, subst)?, try_relabel(b, subst)?),
        Formula::Or(a, b) => Formula::or(try_relabel(a, subst)?, try_relabel(b, subst)?),
        Formula::Imp(a, b) => Formula::imp(try_relabel(a, subst)?, try_relabel(b, subst)?),
        Formula::Box(m, g) => Formula::boxed(subst(m)?, try_relabel(g, subst)?),
        Formula::Dia(m, g) => Formula::dia(subst(m)?, try_relabel(g, subst)?),
    })
}

/// The boxed subformulas of a natural-token formula: every `[m]p` subformula
/// contributes `(m, p)`, and every `<m>p` subformula contributes the boxed
/// form `(m, ~p)` of its dual. Duplicates are dropped; the result is sorted
/// by modality, ties broken by printed form.
fn boxed_subformulas(f: &Formula) -> Result<Vec<(u64, Formula)>, ReductionError> {
    let mut out: Vec<(u64, Formula)> = Vec::new();
    collect_boxed(f, &mut out)?;
    out.sort_by(|(ma, fa), (mb, fb)| ma.cmp(mb).then_with(|| print(fa).cmp(&print(fb))));
    out.dedup();
    Ok(out)
}

fn collect_boxed(f: &Formula, out: &mut Vec<(u64, Formula)>) -> Result<(), ReductionError> {
    match f {
        Formula::Top | Formula::Bot | Formula::Var(_) => Ok(()),
        Formula::Not(g) => collect_boxed(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            collect_boxed(a, out)?;
            collect_boxed(b, out)
        }
        Formula::Box(m, g) => {
            out.push((natural_token(m)?, (**g).clone()));
            collect_boxed(g, out)
        }
        Formula::Dia(m, g) => {
            out.push((natural_token(m)?, Formula::not((**g).clone())));
            collect_boxed(g, out)
        }
    }
}

fn natural_token(m: &Modal) -> Result<u64, ReductionError> {
    m.token
        .parse()
        .map_err(|_| ReductionError::NotNatural(m.token.clone()))
}

fn nat_modal(m: u64) -> Modal {
    Modal::new(m.to_string(), Order::Naturals.name())
}

/// The monotonicity conjunction `N(f)`: for boxed subformulas `[m_i]p_i`
/// sorted by modality, the conjunction of `[m_i]p_i -> [m_j]p_i` over all
/// pairs `i < j`.
fn n_conjunction(subs: &[(u64, Formula)]) -> Formula {
    let mut parts = Vec::new();
    for (i, (mi, pi)) in subs.iter().enumerate() {
        for (mj, _) in &subs[i + 1..] {
            debug_assert!(mi <= mj);
            parts.push(Formula::imp(
                Formula::boxed(nat_modal(*mi), pi.clone()),
                Formula::boxed(nat_modal(*mj), pi.clone()),
            ));
        }
    }
    Formula::conj_fold(parts)
}

/// `N+(f) = N(f) & [m_1]N(f) & ... & [m_k]N(f)` over the distinct
/// modalities of the boxed subformulas of `f`, ascending.
pub fn n_plus(f: &Formula) -> Result<Formula, ReductionError> {
    let subs = boxed_subformulas(f)?;
    let n = n_conjunction(&subs);
    let mut mods: Vec<u64> = subs.iter().map(|(m, _)| *m).collect();
    mods.dedup();
    let mut parts = vec![n.clone()];
    parts.extend(mods.into_iter().map(|m| Formula::boxed(nat_modal(m), n.clone())));
    Ok(Formula::conj_fold(parts))
}

/// The saturated monotonicity conjunction `M(f)`: for each boxed subformula
/// `[m_i]p_i`, the conjunction of `[m_i]p_i -> [j]p_i` over every natural
/// `j` with `m_i < j <= max_m`, where `max_m` is the largest boxed modality.
fn m_conjunction(subs: &[(u64, Formula)], max_m: u64) -> Formula {
    let mut parts = Vec::new();
    for (mi, pi) in subs {
        for j in mi + 1..=max_m {
            parts.push(Formula::imp(
                Formula::boxed(nat_modal(*mi), pi.clone()),
                Formula::boxed(nat_modal(j), pi.clone()),
            ));
        }
    }
    Formula::conj_fold(parts)
}

/// `M+(f) = M(f) & [0]M(f) & ... & [max_m]M(f)` over every natural up to
/// the largest boxed modality of `f`.
pub fn m_plus(f: &Formula) -> Result<Formula, ReductionError> {
    let subs = boxed_subformulas(f)?;
    let Some(max_m) = subs.iter().map(|(m, _)| *m).max() else {
        return Ok(Formula::Top);
    };
    let m = m_conjunction(&subs, max_m);
    let mut parts = vec![m.clone()];
    parts.extend((0..=max_m).map(|i| Formula::boxed(nat_modal(i), m.clone())));
    Ok(Formula::conj_fold(parts))
}

/// The reduction target `N+(f^) -> f^` over the hatted signature. The
/// original formula is provable exactly when the target is provable in the
/// auxiliary logic, which the finite countermodel search refutes.
pub fn reduction_target(f: &Formula, order: &Order) -> Result<HattedFormula, ReductionError> {
    let hatted = hat(f, order)?;
    let target = Formula::imp(n_plus(&hatted.formula)?, hatted.formula.clone());
    Ok(HattedFormula {
        formula: target,
        map: hatted.map,
    })
}

/// The reduction target built with `M+` instead of `N+`.
pub fn reduction_target_m(f: &Formula, order: &Order) -> Result<HattedFormula, ReductionError> {
    let hatted = hat(f, order)?;
    let target = Formula::imp(m_plus(&hatted.formula)?, hatted.formula.clone());
    Ok(HattedFormula {
        formula: target,
        map: hatted.map,
    })
}
