//! Decision engine and worm calculus for polymodal provability logic over
//! pluggable linear orders, with an independent finite-model oracle for
//! cross-checking verdicts and searching for countermodels.
//!
//! The crate is organized bottom-up:
//!
//! - [`order`]: modal signature orders (naturals, finite initial segments,
//!   integers, lexicographic pairs) and token comparison.
//! - [`syntax`]: formulas, the text grammar, parsing and printing.
//! - [`worm`]: worms (iterated diamonds over `T`), their well-order, normal
//!   forms, conjunction, and entailment.
//! - [`closed`]: the decision procedure for closed formulas via Boolean
//!   combinations of worms and clausal normal form.
//! - [`reduction`]: signature relabeling onto the naturals and the
//!   translation into the weaker logic whose finite models are searchable.
//! - [`kripke`]: finite model checking, frame validation, exhaustive frame
//!   enumeration, and countermodel search.

pub mod closed;
pub mod kripke;
pub mod order;
pub mod reduction;
pub mod syntax;
pub mod worm;

pub use closed::{
    bcw, clauses_to_formula, decide, diamond_dnf, formula_wnf, is_consistent, nat_worm_formula,
    zero_diamond_worm, ClosedError, Disjunct, Verdict, WormClause, WormDnf,
};
pub use kripke::{
    countermodel_search, enumerate_frames, CheckResult, FrameViolation, JModel, KripkeError,
    SearchOutcome, WORLD_CAP,
};
pub use order::{signature_of, Modal, Order, OrderError, SignatureMap};
pub use reduction::{
    hat, m_plus, n_plus, reduction_target, reduction_target_m, unhat, HattedFormula,
    ReductionError,
};
pub use syntax::{
    as_worm, formula_to_json, is_closed, parse, print, symbol_count, worm_formula, Formula,
    SyntaxError, Worm,
};
pub use worm::{
    decompose, is_wnf, mod_set, normalize, worm_compare, worm_conj, worm_entails,
    BlockDecomposition, NWorm, NormalWorm, WormError,
};
