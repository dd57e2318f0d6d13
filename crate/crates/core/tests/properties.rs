//! Property tests for the algebraic laws the library promises: normal-form
//! contracts, the worm order, conjunction, entailment, the decision
//! procedure's internal consistency, relabeling, and the finite-model side.

use std::cmp::Ordering;

use proptest::prelude::*;

use glp_core::{
    bcw, clauses_to_formula, countermodel_search, decide, enumerate_frames, formula_wnf, hat,
    is_consistent, is_wnf, mod_set, nat_worm_formula, normalize, parse, print, unhat, worm_compare,
    worm_conj, worm_entails, zero_diamond_worm, Formula, JModel, Modal, NWorm, Order,
    SearchOutcome,
};

fn omega() -> Order {
    Order::Naturals
}

fn nat_modal(e: u64) -> Modal {
    Modal::new(e.to_string(), Order::Naturals.name())
}

fn dia_chain(entries: &[u64]) -> Formula {
    nat_worm_formula(entries)
}

fn provable(f: &Formula) -> bool {
    decide(f, &omega()).unwrap().provable
}

// -- Generators -------------------------------------------------------------

fn worm(max_entry: u64, max_len: usize) -> impl Strategy<Value = NWorm> {
    prop::collection::vec(0..=max_entry, 0..=max_len)
}

fn worm_above(alpha: u64, max_entry: u64, max_len: usize) -> impl Strategy<Value = NWorm> {
    prop::collection::vec(alpha..=max_entry, 0..=max_len)
}

/// Closed formulas over natural tokens `0..=max_entry`.
fn closed_formula(max_entry: u64, depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just(Formula::Top), Just(Formula::Bot)];
    leaf.prop_recursive(depth, 16, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (0..=max_entry, inner.clone()).prop_map(|(m, g)| Formula::boxed(nat_modal(m), g)),
            (0..=max_entry, inner).prop_map(|(m, g)| Formula::dia(nat_modal(m), g)),
        ]
    })
}

/// Formulas with variables, for the parser round trip.
fn open_formula(order: Order, tokens: Vec<String>) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Top),
        Just(Formula::Bot),
        prop_oneof![Just("p"), Just("q"), Just("r2")].prop_map(|v| Formula::Var(v.into())),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let token = prop::sample::select(tokens.clone());
        let name = order.name();
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (token.clone(), inner.clone()).prop_map({
                let name = name.clone();
                move |(t, g)| Formula::boxed(Modal::new(t, name.clone()), g)
            }),
            (token, inner).prop_map(move |(t, g)| Formula::dia(Modal::new(t, name.clone()), g)),
        ]
    })
}

// -- Parser and printer -----------------------------------------------------

proptest! {
    #[test]
    fn print_parse_round_trip_naturals(
        f in open_formula(Order::Naturals, vec!["0".into(), "1".into(), "12".into()])
    ) {
        let text = print(&f);
        prop_assert_eq!(parse(&text, &omega()).unwrap(), f);
    }

    #[test]
    fn print_parse_round_trip_integers(
        f in open_formula(Order::Integers, vec!["-2".into(), "0".into(), "5".into()])
    ) {
        let text = print(&f);
        prop_assert_eq!(parse(&text, &Order::Integers).unwrap(), f);
    }

    #[test]
    fn print_parse_round_trip_lexpair(
        f in open_formula(
            Order::parse_spec("lexpair:int,omega").unwrap(),
            vec!["(-1,3)".into(), "(0,0)".into(), "(2,7)".into()],
        )
    ) {
        let order = Order::parse_spec("lexpair:int,omega").unwrap();
        let text = print(&f);
        prop_assert_eq!(parse(&text, &order).unwrap(), f);
    }
}

// -- Normal forms -----------------------------------------------------------

proptest! {
    #[test]
    fn normalize_is_idempotent_and_normal(w in worm(3, 8)) {
        let nf = normalize(&w);
        prop_assert!(is_wnf(nf.as_slice()));
        prop_assert_eq!(normalize(nf.as_slice()), nf.clone());
        // The normal form only shrinks and never invents modalities.
        prop_assert!(nf.len() <= w.len());
        prop_assert!(mod_set(nf.as_slice()).is_subset(&mod_set(&w)));
    }

    #[test]
    fn normalize_preserves_meaning(w in worm(2, 6)) {
        let nf = normalize(&w);
        let equivalence = Formula::and(
            Formula::imp(dia_chain(&w), dia_chain(nf.as_slice())),
            Formula::imp(dia_chain(nf.as_slice()), dia_chain(&w)),
        );
        prop_assert!(provable(&equivalence));
    }

    #[test]
    fn mutual_entailment_is_normal_form_equality(a in worm(2, 6), b in worm(2, 6)) {
        let mutual = worm_entails(&a, &b) && worm_entails(&b, &a);
        prop_assert_eq!(mutual, normalize(&a) == normalize(&b));
    }
}

// -- The worm order ---------------------------------------------------------

proptest! {
    #[test]
    fn compare_is_antisymmetric_and_total(
        alpha in 0u64..3,
        a in worm_above(0, 3, 6),
        b in worm_above(0, 3, 6),
    ) {
        // Lift both worms into the fragment so comparison is defined.
        let a: NWorm = a.iter().map(|e| e + alpha).collect();
        let b: NWorm = b.iter().map(|e| e + alpha).collect();
        let (na, nb) = (normalize(&a), normalize(&b));
        let ab = worm_compare(alpha, &na, &nb).unwrap();
        let ba = worm_compare(alpha, &nb, &na).unwrap();
        prop_assert_eq!(ab, ba.reverse());
        prop_assert_eq!(ab == Ordering::Equal, na == nb);
    }

    #[test]
    fn compare_is_transitive(
        a in worm(2, 6),
        b in worm(2, 6),
        c in worm(2, 6),
    ) {
        let (na, nb, nc) = (normalize(&a), normalize(&b), normalize(&c));
        let ab = worm_compare(0, &na, &nb).unwrap();
        let bc = worm_compare(0, &nb, &nc).unwrap();
        if ab == bc {
            prop_assert_eq!(worm_compare(0, &na, &nc).unwrap(), ab);
        }
    }

    #[test]
    fn compare_agrees_with_provability(a in worm(2, 4), b in worm(2, 4)) {
        // A <_0 B holds by definition exactly when B -> <0>A is provable.
        let (na, nb) = (normalize(&a), normalize(&b));
        let less = worm_compare(0, &na, &nb).unwrap() == Ordering::Less;
        let mut zero_a = vec![0];
        zero_a.extend_from_slice(&a);
        let implication = Formula::imp(dia_chain(&b), dia_chain(&zero_a));
        prop_assert_eq!(less, provable(&implication));
    }

    #[test]
    fn order_is_irreflexive(w in worm(2, 6), alpha in 0u64..3) {
        let mut alpha_w = vec![alpha];
        alpha_w.extend_from_slice(&w);
        prop_assert!(!worm_entails(&w, &alpha_w));
        let f = Formula::imp(dia_chain(&w), dia_chain(&alpha_w));
        prop_assert!(!provable(&f));
    }

    #[test]
    fn left_extension_strictly_increases(
        alpha in 0u64..2,
        a in worm_above(0, 2, 5),
        c in worm_above(0, 2, 4),
    ) {
        prop_assume!(!c.is_empty());
        let a: NWorm = a.iter().map(|e| e + alpha).collect();
        let c: NWorm = c.iter().map(|e| e + alpha).collect();
        let mut ca = c.clone();
        ca.extend_from_slice(&a);
        let cmp = worm_compare(alpha, &normalize(&a), &normalize(&ca)).unwrap();
        prop_assert_eq!(cmp, Ordering::Less);
    }
}

// -- Conjunction ------------------------------------------------------------

proptest! {
    #[test]
    fn conjunction_laws(a in worm(2, 6), b in worm(2, 6)) {
        let c = worm_conj(&a, &b);
        // Commutative and idempotent at the normal-form level.
        prop_assert_eq!(normalize(&worm_conj(&b, &a)), normalize(&c));
        prop_assert_eq!(normalize(&worm_conj(&a, &a)), normalize(&a));
        // The conjunction entails both conjuncts.
        prop_assert!(worm_entails(&c, &a));
        prop_assert!(worm_entails(&c, &b));
        // Resource bounds: no new modalities, no longer than both inputs.
        let mut union = mod_set(&a);
        union.extend(mod_set(&b));
        prop_assert!(mod_set(&c).is_subset(&union));
        prop_assert!(c.len() <= a.len() + b.len());
    }

    #[test]
    fn conjunction_is_the_meet(a in worm(2, 5), b in worm(2, 5)) {
        let c = worm_conj(&a, &b);
        let equivalence = Formula::and(
            Formula::imp(
                Formula::and(dia_chain(&a), dia_chain(&b)),
                dia_chain(&c),
            ),
            Formula::imp(
                dia_chain(&c),
                Formula::and(dia_chain(&a), dia_chain(&b)),
            ),
        );
        prop_assert!(provable(&equivalence));
    }
}

// -- Decision procedure internals -------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decide_is_self_consistent(f in closed_formula(1, 3)) {
        let direct = decide(&f, &omega()).unwrap().provable;
        let via_bcw = decide(&bcw(&f).unwrap().to_formula(), &omega()).unwrap().provable;
        let via_wnf = decide(&clauses_to_formula(&formula_wnf(&f).unwrap()), &omega())
            .unwrap()
            .provable;
        prop_assert_eq!(direct, via_bcw);
        prop_assert_eq!(direct, via_wnf);
    }

    #[test]
    fn bcw_signature_containment(f in closed_formula(2, 3)) {
        let sig = mod_set_of_formula(&f);
        for d in &bcw(&f).unwrap().disjuncts {
            for w in d.positives.iter().chain(&d.negatives) {
                prop_assert!(mod_set(w).is_subset(&sig));
            }
        }
    }

    #[test]
    fn disjunction_property(a in worm(2, 5), b1 in worm(2, 5), b2 in worm(2, 5)) {
        let split = Formula::imp(
            dia_chain(&a),
            Formula::or(dia_chain(&b1), dia_chain(&b2)),
        );
        let left = Formula::imp(dia_chain(&a), dia_chain(&b1));
        let right = Formula::imp(dia_chain(&a), dia_chain(&b2));
        prop_assert_eq!(provable(&split), provable(&left) || provable(&right));
    }

    #[test]
    fn strictness_law(
        alpha in 0u64..2,
        a in worm_above(0, 2, 4),
        others in prop::collection::vec(worm_above(0, 2, 4), 1..=3),
    ) {
        let a: NWorm = a.iter().map(|e| e + alpha).collect();
        let others: Vec<NWorm> = others
            .iter()
            .map(|w| w.iter().map(|e| e + alpha).collect())
            .collect();
        prop_assume!(others.iter().all(|w| !worm_entails(&a, w)));
        let mut alpha_a = vec![alpha];
        alpha_a.extend_from_slice(&a);
        let f = Formula::imp(
            Formula::and(
                dia_chain(&a),
                Formula::disj_fold(others.iter().map(|w| dia_chain(w)).collect()),
            ),
            dia_chain(&alpha_a),
        );
        prop_assert!(provable(&f));
    }

    #[test]
    fn provable_formulas_have_no_small_countermodel(f in closed_formula(1, 2)) {
        if decide(&f, &omega()).unwrap().provable {
            let outcome = countermodel_search(&f, &omega(), 2).unwrap();
            prop_assert_eq!(outcome, SearchOutcome::NotFound);
        }
    }

    #[test]
    fn found_countermodels_really_refute(f in closed_formula(1, 2)) {
        if let SearchOutcome::Found { model, world } =
            countermodel_search(&f, &omega(), 2).unwrap()
        {
            model.validate_frame().unwrap();
            // The countermodel refutes the reduction target at the world.
            let target = glp_core::reduction_target(&f, &omega()).unwrap();
            prop_assert!(!model.model_check(&world, &target.formula).unwrap());
        }
    }

    #[test]
    fn zero_diamond_contract(f in closed_formula(1, 2)) {
        prop_assume!(is_consistent(&f, &omega()).unwrap());
        let a = zero_diamond_worm(&f, &omega()).unwrap();
        prop_assert!(is_wnf(&a));
        prop_assert!(a.contains(&0));
        let mut allowed = mod_set_of_formula(&f);
        allowed.insert(0);
        prop_assert!(mod_set(&a).is_subset(&allowed));
        // <0>f is equivalent to the worm.
        let zero_f = Formula::dia(nat_modal(0), f.clone());
        let equivalence = Formula::and(
            Formula::imp(zero_f.clone(), dia_chain(&a)),
            Formula::imp(dia_chain(&a), zero_f),
        );
        prop_assert!(provable(&equivalence));
    }
}

fn mod_set_of_formula(f: &Formula) -> std::collections::BTreeSet<u64> {
    match f {
        Formula::Top | Formula::Bot | Formula::Var(_) => Default::default(),
        Formula::Not(g) => mod_set_of_formula(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            let mut s = mod_set_of_formula(a);
            s.extend(mod_set_of_formula(b));
            s
        }
        Formula::Box(m, g) | Formula::Dia(m, g) => {
            let mut s = mod_set_of_formula(g);
            s.insert(m.token.parse().unwrap());
            s
        }
    }
}

// -- Relabeling -------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hat_round_trips_and_preserves_verdicts(
        f in open_formula(Order::Integers, vec!["-7".into(), "0".into(), "3".into()])
            .prop_filter("closed formulas only", glp_core::is_closed)
    ) {
        let order = Order::Integers;
        let hatted = hat(&f, &order).unwrap();
        prop_assert_eq!(unhat(&hatted).unwrap(), f.clone());
        let original = decide(&f, &order).unwrap();
        let relabeled = decide(&hatted.formula, &omega()).unwrap();
        prop_assert_eq!(original.provable, relabeled.provable);
    }
}

// -- Finite models ----------------------------------------------------------

#[test]
fn enumerated_frames_satisfy_the_frame_conditions() {
    for (n, max_index) in [(1, 0), (2, 0), (2, 1), (3, 1)] {
        for frame in enumerate_frames(n, max_index).unwrap() {
            frame
                .validate_frame()
                .unwrap_or_else(|v| panic!("bad frame from enumeration: {v}"));
        }
    }
}

#[test]
fn model_json_round_trips() {
    for frame in enumerate_frames(3, 1).unwrap() {
        let json = frame.to_json();
        let back = JModel::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
    }
}

#[test]
fn boxes_over_empty_relations_are_valid() {
    // A two-world chain for relation 0 declares nothing for relation 7,
    // so [7] of anything holds everywhere.
    let m = JModel::new(
        vec!["x".into(), "y".into()],
        &[(0, vec![("x".into(), "y".into())])],
    )
    .unwrap();
    let f = parse("[7]F", &Order::Naturals).unwrap();
    assert!(m.is_valid_on(&f).unwrap().valid);
    let g = parse("<7>T", &Order::Naturals).unwrap();
    assert!(!m.model_check("x", &g).unwrap());
}
