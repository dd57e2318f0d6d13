//! The worm calculus over natural-number modalities.
//!
//! A worm is a formula `<a1>...<an>T`; here it is represented by its entry
//! sequence `[a1, ..., an]`, the empty worm being `T`. Worms over an
//! arbitrary order are first relabeled onto naturals (see `reduction`), so
//! this module works with `u64` entries throughout.
//!
//! Central notions:
//!
//! * block decomposition at the minimal entry (the pivot),
//! * the normal form: pivot blocks normalized and non-decreasing from left
//!   to right, so the rightmost block is the largest,
//! * the well-order `<_a` on worms with entries at least `a`, computed by
//!   right-aligned comparison of pivot blocks,
//! * conjunction: the single worm equivalent to `A & B`.
//!
//! Two rewrite facts drive normalization. Pivot runs collapse after a
//! nonempty higher block (`A a a B` and `A a B` are equivalent for nonempty
//! `A` with entries above `a`), and a block strictly below its left
//! neighbour is absorbed by it (`A1 a A0 B` is equivalent to `A1 B` when
//! `A0 <_{a+1} A1`). Absorption subsumes the run collapse, so `normalize`
//! only needs the absorption pass.

use std::cmp::Ordering;

use thiserror::Error;

/// A worm over natural modalities: the entries of `<a1>...<an>T` in order.
pub type NWorm = Vec<u64>;

/// Errors raised by worm operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WormError {
    /// `decompose` needs at least one entry.
    #[error("the empty worm has no block decomposition")]
    EmptyWorm,
    /// A comparison was requested at a level above some entry.
    #[error("worm has entries below level {alpha}")]
    NotInFragment { alpha: u64 },
    /// A `NormalWorm` was claimed from a worm that is not in normal form.
    #[error("worm is not in normal form")]
    NotNormal,
}

/// Block decomposition of a nonempty worm at its minimal entry.
///
/// For `w = B_k p B_{k-1} p ... p B_1` with pivot `p = min(w)`, the blocks
/// are `[B_k, ..., B_1]` left to right; all block entries exceed the pivot.
/// A worm with `k` pivot occurrences has `k + 1` blocks, so `[2]` decomposes
/// into pivot `2` and two empty blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub pivot: u64,
    pub blocks: Vec<NWorm>,
}

/// Decompose a nonempty worm at its minimal entry.
pub fn decompose(w: &[u64]) -> Result<BlockDecomposition, WormError> {
    let pivot = *w.iter().min().ok_or(WormError::EmptyWorm)?;
    let blocks = w.split(|&e| e == pivot).map(<[u64]>::to_vec).collect();
    Ok(BlockDecomposition { pivot, blocks })
}

/// A worm certified to be in normal form. Obtained from `normalize`, or via
/// `new` which checks the invariant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormalWorm(NWorm);

impl NormalWorm {
    /// Wrap a worm already in normal form; rejects others.
    pub fn new(w: NWorm) -> Result<NormalWorm, WormError> {
        if is_wnf(&w) {
            Ok(NormalWorm(w))
        } else {
            Err(WormError::NotNormal)
        }
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_inner(self) -> NWorm {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[u64]> for NormalWorm {
    fn as_ref(&self) -> &[u64] {
        &self.0
    }
}

/// True when the worm is in normal form: every pivot block is in normal
/// form and the blocks are non-decreasing from left to right.
pub fn is_wnf(w: &[u64]) -> bool {
    if w.is_empty() {
        return true;
    }
    let d = decompose(w).expect("nonempty");
    if !d.blocks.iter().all(|b| is_wnf(b)) {
        return false;
    }
    d.blocks
        .windows(2)
        .all(|pair| cmp_nf(&pair[0], &pair[1]) != Ordering::Greater)
}

/// Compare two worms in normal form. The same relation is computed at every
/// level on which both worms live, so no level parameter is needed here.
///
/// The rule: align the pivot blocks of both sides at the right (the
/// rightmost block is the most significant), compare pairs right to left by
/// recursion, and if one side runs out of blocks first the longer side is
/// greater. The empty worm is below every nonempty worm.
pub(crate) fn cmp_nf(a: &[u64], b: &[u64]) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    if a.is_empty() {
        return Ordering::Less;
    }
    if b.is_empty() {
        return Ordering::Greater;
    }
    let pivot = (*a.iter().min().unwrap()).min(*b.iter().min().unwrap());
    let ab: Vec<&[u64]> = a.split(|&e| e == pivot).collect();
    let bb: Vec<&[u64]> = b.split(|&e| e == pivot).collect();
    for i in 1..=ab.len().min(bb.len()) {
        let x = ab[ab.len() - i];
        let y = bb[bb.len() - i];
        match cmp_nf(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    ab.len().cmp(&bb.len())
}

/// Compare two normal-form worms in the order `<_alpha`. Both worms must
/// live in the fragment with entries at least `alpha`.
pub fn worm_compare(
    alpha: u64,
    a: &NormalWorm,
    b: &NormalWorm,
) -> Result<Ordering, WormError> {
    for w in [a, b] {
        if w.as_slice().iter().any(|&e| e < alpha) {
            return Err(WormError::NotInFragment { alpha });
        }
    }
    Ok(cmp_nf(a.as_slice(), b.as_slice()))
}

/// Normalize a worm: the unique normal form provably equivalent to it.
pub fn normalize(w: &[u64]) -> NormalWorm {
    NormalWorm(nf(w))
}

fn nf(w: &[u64]) -> NWorm {
    if w.is_empty() {
        return Vec::new();
    }
    let pivot = *w.iter().min().unwrap();
    // Process raw blocks right to left, keeping the normalized suffix as a
    // block list. A new block absorbs every leading suffix block strictly
    // below it.
    let mut blocks: Vec<NWorm> = Vec::new();
    for raw in w.split(|&e| e == pivot).rev() {
        let n = nf(raw);
        while let Some(first) = blocks.first() {
            if cmp_nf(first, &n) == Ordering::Less {
                blocks.remove(0);
            } else {
                break;
            }
        }
        blocks.insert(0, n);
    }
    if blocks.len() == 1 {
        // Every pivot occurrence was absorbed.
        return blocks.pop().unwrap();
    }
    let mut out = Vec::with_capacity(w.len());
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            out.push(pivot);
        }
        out.extend_from_slice(b);
    }
    out
}

/// The single worm equivalent to the conjunction `A & B`. Inputs need not
/// be normal; the result is a worm over `mod(A) + mod(B)` that is provably
/// equivalent to the conjunction, but is not itself normalized.
pub fn worm_conj(a: &[u64], b: &[u64]) -> NWorm {
    conj_nf(&nf(a), &nf(b))
}

fn conj_nf(a: &[u64], b: &[u64]) -> NWorm {
    if a.is_empty() {
        return b.to_vec();
    }
    if b.is_empty() {
        return a.to_vec();
    }
    let pivot = (*a.iter().min().unwrap()).min(*b.iter().min().unwrap());
    let sa = split_first(a, pivot);
    let sb = split_first(b, pivot);
    let (head, tail) = match (sa, sb) {
        (Some((a1, a2)), Some((b1, b2))) => {
            // Both sides step at the pivot: the conjunction keeps the
            // larger tail, and the heads conjoin one level up.
            let tail = if cmp_nf(a2, b2) == Ordering::Less { b2 } else { a2 };
            (conj_nf(a1, b1), tail)
        }
        // One side lives entirely above the pivot and merges into the
        // other side's head.
        (None, Some((b1, b2))) => (conj_nf(a, b1), b2),
        (Some((a1, a2)), None) => (conj_nf(a1, b), a2),
        (None, None) => unreachable!("pivot occurs in at least one side"),
    };
    let mut out = head;
    out.push(pivot);
    out.extend_from_slice(tail);
    out
}

/// Split at the first occurrence of `pivot`: `w = head pivot tail`.
fn split_first(w: &[u64], pivot: u64) -> Option<(&[u64], &[u64])> {
    w.iter()
        .position(|&e| e == pivot)
        .map(|i| (&w[..i], &w[i + 1..]))
}

/// Does `A -> B` hold? Equivalent to the conjunction of the two worms
/// collapsing back to `A` itself.
pub fn worm_entails(a: &[u64], b: &[u64]) -> bool {
    let na = nf(a);
    let c = conj_nf(&na, &nf(b));
    nf(&c) == na
}

/// The set of distinct entries of a worm.
pub fn mod_set(w: &[u64]) -> std::collections::BTreeSet<u64> {
    w.iter().copied().collect()
}
