//! Property suites for the algebraic laws and the invariants the public
//! API promises: ordinal arithmetic identities, normal-form round trips,
//! normalization/decision coherence, and the derived entailment
//! principles of the calculus.

mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use tsc::decision::consequence_bound;
use tsc::normalform::{check_mnf, inf_to_mnf, merge_mnf, mnf_to_inf, Mnf, Monomial};
use tsc::ordinal::hyper_exp;
use tsc::{
    check_derivation, decide, derive_witness, equiv_level, equivalent, normalize,
    normalize_traced, pi_fragment, Formula, Ordinal, Sequent,
};

fn arb_ordinal() -> impl Strategy<Value = Ordinal> {
    let leaf = (0u32..6).prop_map(Ordinal::natural);
    leaf.prop_recursive(3, 24, 3, |inner| {
        (
            prop::collection::vec((inner, 1u32..4), 1..3),
            0u32..4,
        )
            .prop_map(|(mut terms, tail)| {
                terms.sort_by(|a, b| b.0.cmp(&a.0));
                let mut out = Ordinal::zero();
                for (e, c) in terms {
                    out = out + Ordinal::omega_power(e) * Ordinal::natural(c);
                }
                out + Ordinal::natural(tail)
            })
    })
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Top),
        (0u32..5, arb_ordinal()).prop_map(|(n, a)| Formula::diamond(n, a, Formula::Top)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (0u32..5, arb_ordinal(), inner.clone())
                .prop_map(|(n, a, f)| Formula::diamond(n, a, f)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::and(l, r)),
        ]
    })
}

fn embed(psi: &Mnf) -> Formula {
    psi.to_formula()
}

// -------------------------------------------------------------------
// Ordinal arithmetic.

proptest! {
    #[test]
    fn addition_is_associative(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        prop_assert_eq!(
            (a.clone() + b.clone()) + c.clone(),
            a + (b + c)
        );
    }

    #[test]
    fn multiplication_is_associative(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        prop_assert_eq!(
            (a.clone() * b.clone()) * c.clone(),
            a * (b * c)
        );
    }

    #[test]
    fn multiplication_left_distributes(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        prop_assert_eq!(
            a.clone() * (b.clone() + c.clone()),
            a.clone() * b + a * c
        );
    }

    #[test]
    fn additive_and_multiplicative_identities(a in arb_ordinal()) {
        prop_assert_eq!(a.clone() + Ordinal::zero(), a.clone());
        prop_assert_eq!(Ordinal::zero() + a.clone(), a.clone());
        prop_assert_eq!(a.clone() * Ordinal::one(), a.clone());
        prop_assert_eq!(Ordinal::one() * a.clone(), a);
    }

    #[test]
    fn left_subtraction_inverts_addition(a in arb_ordinal(), b in arb_ordinal()) {
        let sum = a.clone() + b.clone();
        prop_assert_eq!(sum.left_subtract(&a).unwrap(), b);
    }

    #[test]
    fn left_subtraction_witnesses_the_order(a in arb_ordinal(), b in arb_ordinal()) {
        match b.left_subtract(&a) {
            Ok(diff) => {
                prop_assert!(a <= b);
                prop_assert_eq!(a + diff, b);
            }
            Err(_) => prop_assert!(a > b),
        }
    }

    #[test]
    fn left_division_inverts_omega_power_multiplication(
        e in arb_ordinal(),
        x in arb_ordinal(),
    ) {
        let divisor = Ordinal::omega_power(e);
        let product = divisor.clone() * x.clone();
        prop_assert_eq!(product.left_divide(&divisor).unwrap(), x);
    }

    #[test]
    fn hyper_exponentials_compose(a in arb_ordinal(), n in 0u32..3, m in 0u32..3) {
        prop_assert_eq!(
            hyper_exp(n + m, &a),
            hyper_exp(n, &hyper_exp(m, &a))
        );
    }

    #[test]
    fn hyper_exponential_is_monotone(a in arb_ordinal(), b in arb_ordinal(), n in 1u32..4) {
        if a <= b {
            prop_assert!(hyper_exp(n, &a) <= hyper_exp(n, &b));
        }
    }

    #[test]
    fn ordinal_display_parses_back(a in arb_ordinal()) {
        let text = a.to_string();
        prop_assert_eq!(text.parse::<Ordinal>().unwrap(), a);
    }

    #[test]
    fn formula_display_parses_back(f in arb_formula()) {
        let text = f.to_string();
        prop_assert_eq!(text.parse::<Formula>().unwrap(), f);
    }

    #[test]
    fn sequent_display_parses_back(l in arb_formula(), r in arb_formula()) {
        let s = Sequent::new(l, r);
        let text = s.to_string();
        prop_assert_eq!(text.parse::<Sequent>().unwrap(), s);
    }
}

// -------------------------------------------------------------------
// Normalization and the decision procedure.

proptest! {
    #[test]
    fn normalization_is_idempotent(f in arb_formula()) {
        let psi = normalize(&f);
        prop_assert_eq!(normalize(&embed(&psi)), psi);
    }

    #[test]
    fn normal_forms_are_valid_and_equivalent(f in arb_formula()) {
        let psi = normalize(&f);
        prop_assert!(check_mnf(&embed(&psi)) || psi.is_top());
        prop_assert!(equivalent(&f, &embed(&psi)));
        prop_assert!(decide(&f, &embed(&psi)).derivable);
        prop_assert!(decide(&embed(&psi), &f).derivable);
    }

    #[test]
    fn decision_is_reflexive_and_bounded_by_top(f in arb_formula()) {
        prop_assert!(decide(&f, &f).derivable);
        prop_assert!(decide(&f, &Formula::Top).derivable);
    }

    #[test]
    fn mutual_derivability_is_equality_of_normal_forms(
        f in arb_formula(),
        g in arb_formula(),
    ) {
        let both = decide(&f, &g).derivable && decide(&g, &f).derivable;
        prop_assert_eq!(both, normalize(&f) == normalize(&g));
        prop_assert_eq!(both, equivalent(&f, &g));
    }

    #[test]
    fn conjunction_order_is_irrelevant(f in arb_formula(), g in arb_formula()) {
        prop_assert!(equivalent(
            &Formula::and(f.clone(), g.clone()),
            &Formula::and(g, f)
        ));
    }

    #[test]
    fn equivalence_restricts_to_every_level(f in arb_formula(), n in 0u32..5) {
        prop_assert!(equiv_level(&f, &embed(&normalize(&f)), n));
    }

    #[test]
    fn traces_chain_and_land_on_the_normal_form(f in arb_formula()) {
        let (psi, trace) = normalize_traced(&f);
        prop_assert_eq!(&psi, &normalize(&f));
        let mut state = f.elide_zero_exponents();
        for step in &trace.steps {
            prop_assert_eq!(&step.before, &state);
            state = step.after.clone();
        }
        prop_assert_eq!(state, embed(&psi));
    }
}

// -------------------------------------------------------------------
// Normal-form conversions on structured random inputs.

#[test]
fn normal_form_conversions_roundtrip() {
    let mut rng = rng(0x5eed_0001);
    for _ in 0..500 {
        let psi = random_mnf(&mut rng, 5, 3);
        let a = mnf_to_inf(&psi);
        assert_eq!(inf_to_mnf(&a), psi, "M(I(ψ)) = ψ failed for {psi}");

        let b = random_inf(&mut rng, 5, 3);
        assert_eq!(mnf_to_inf(&inf_to_mnf(&b)), b, "I(M(A)) = A failed for {b}");
    }
}

#[test]
fn conversion_commutes_with_head_peeling() {
    let mut rng = rng(0x5eed_0002);
    for _ in 0..500 {
        let psi = random_mnf(&mut rng, 5, 3);
        if psi.is_top() {
            continue;
        }
        assert_eq!(
            mnf_to_inf(&psi.tail()),
            mnf_to_inf(&psi).tail(),
            "head peeling failed for {psi}"
        );
    }
}

#[test]
fn permuted_monomials_are_rejected() {
    let mut rng = rng(0x5eed_0003);
    let mut checked = 0;
    while checked < 200 {
        let psi = random_mnf(&mut rng, 5, 2);
        if psi.len() < 2 {
            continue;
        }
        let mut monomials = psi.monomials().to_vec();
        monomials.swap(0, 1);
        assert!(
            Mnf::new(monomials).is_err(),
            "swapped monomials accepted for {psi}"
        );
        checked += 1;
    }
}

#[test]
fn starved_head_exponents_are_rejected() {
    let mut rng = rng(0x5eed_0004);
    let mut checked = 0;
    while checked < 200 {
        let psi = random_mnf(&mut rng, 5, 2);
        if psi.len() < 2 {
            continue;
        }
        // A head exponent of 1 cannot clear the hyper-exponential
        // threshold imposed by the next monomial.
        let mut monomials = psi.monomials().to_vec();
        monomials[0] = Monomial::new(monomials[0].base(), Ordinal::one()).unwrap();
        assert!(
            Mnf::new(monomials).is_err(),
            "starved head exponent accepted for {psi}"
        );
        checked += 1;
    }
}

#[test]
fn zero_exponent_monomials_are_rejected() {
    assert!(Monomial::new(3, Ordinal::zero()).is_err());
}

// -------------------------------------------------------------------
// Scrambling, constructed entailments, and witnesses.

#[test]
fn scrambling_preserves_the_normal_form() {
    let mut rng = rng(0x5eed_0005);
    for _ in 0..300 {
        let f = random_formula(&mut rng, 4, 4);
        let g = scramble(&mut rng, &f, 6);
        assert_eq!(
            normalize(&f),
            normalize(&g),
            "scramble changed the normal form of {f} (got {g})"
        );
    }
}

#[test]
fn constructed_entailments_are_accepted_and_witnessed() {
    let mut rng = rng(0x5eed_0006);
    for _ in 0..200 {
        let psi = random_mnf(&mut rng, 4, 2);
        let weaker = decide_yes_succedent(&mut rng, &psi);
        let phi = embed(&psi);
        assert!(
            decide(&phi, &weaker).derivable,
            "constructed entailment rejected: {phi} |- {weaker}"
        );
        let witness = derive_witness(&phi, &weaker).expect("witness for a decided sequent");
        check_derivation(&witness).expect("witness fails the checker");
        assert_eq!(
            witness.conclusion,
            Sequent::new(phi.elide_zero_exponents(), weaker.elide_zero_exponents())
        );
    }
}

#[test]
fn entailment_chains_compose() {
    let mut rng = rng(0x5eed_0007);
    for _ in 0..200 {
        let a = random_mnf(&mut rng, 4, 2);
        let b = decide_yes_succedent(&mut rng, &a);
        let c = decide_yes_succedent(&mut rng, &normalize(&b));
        assert!(decide(&embed(&a), &b).derivable);
        assert!(decide(&b, &c).derivable);
        assert!(
            decide(&embed(&a), &c).derivable,
            "transitivity failed: {} |- {b} |- {c}",
            embed(&a)
        );
    }
}

#[test]
fn witnesses_are_refused_exactly_when_decide_says_no() {
    let mut rng = rng(0x5eed_0008);
    let mut refused = 0;
    for _ in 0..300 {
        let f = random_formula(&mut rng, 3, 3);
        let g = random_formula(&mut rng, 3, 3);
        let verdict = decide(&f, &g);
        match derive_witness(&f, &g) {
            Ok(witness) => {
                assert!(verdict.derivable);
                check_derivation(&witness).expect("witness fails the checker");
            }
            Err(_) => {
                assert!(!verdict.derivable);
                refused += 1;
            }
        }
    }
    assert!(refused > 0, "random pairs never produced a refusal");
}

// -------------------------------------------------------------------
// Derived entailment principles of the calculus.

/// Prefixing both sides of a derivable sequent with the same worm
/// preserves derivability.
#[test]
fn worms_are_monotone() {
    let mut rng = rng(0x5eed_0009);
    for _ in 0..200 {
        let psi = random_mnf(&mut rng, 4, 2);
        let weaker = decide_yes_succedent(&mut rng, &psi);
        let phi = embed(&psi);
        let length = rng.gen_range(1..=3);
        // Build one worm and apply it to both sides.
        let spine: Vec<(u32, Ordinal)> = (0..length)
            .map(|_| (rng.gen_range(0..5), random_positive_ordinal(&mut rng, 2)))
            .collect();
        let wrap = |body: &Formula| {
            spine.iter().fold(body.clone(), |acc, (n, a)| {
                Formula::diamond(*n, a.clone(), acc)
            })
        };
        assert!(
            decide(&wrap(&phi), &wrap(&weaker)).derivable,
            "worm prefix broke derivability for {phi} |- {weaker}"
        );
    }
}

/// A worm proves both its body and its own bare spine: Aφ ⊢ φ ∧ A⊤.
#[test]
fn worms_project_onto_body_and_spine() {
    let mut rng = rng(0x5eed_000a);
    for _ in 0..300 {
        let body = random_formula(&mut rng, 4, 2);
        let length = rng.gen_range(1..=3);
        let spine: Vec<(u32, Ordinal)> = (0..length)
            .map(|_| (rng.gen_range(0..5), random_positive_ordinal(&mut rng, 2)))
            .collect();
        let wrap = |inner: Formula| {
            spine.iter().fold(inner, |acc, (n, a)| {
                Formula::diamond(*n, a.clone(), acc)
            })
        };
        let worm_over_body = wrap(body.clone());
        let claim = Formula::and(body, wrap(Formula::Top));
        assert!(
            decide(&worm_over_body, &claim).derivable,
            "projection failed: {worm_over_body} |- {claim}"
        );
    }
}

/// Lowering a base while keeping the exponent weakens the modality:
/// ⟨(m+n)^α⟩φ ⊢ ⟨m^α⟩φ.
#[test]
fn base_lowering_with_fixed_exponent_weakens() {
    let mut rng = rng(0x5eed_000b);
    for _ in 0..300 {
        let m = rng.gen_range(0..4);
        let n = rng.gen_range(0..4);
        let alpha = random_positive_ordinal(&mut rng, 3);
        let phi = random_formula(&mut rng, 3, 2);
        let stronger = Formula::diamond(m + n, alpha.clone(), phi.clone());
        let weaker = Formula::diamond(m, alpha, phi);
        assert!(
            decide(&stronger, &weaker).derivable,
            "base lowering failed: {stronger} |- {weaker}"
        );
    }
}

/// A successor modality at a lower base moves freely under a higher one:
/// ⟨n^α⟩(φ ∧ ψ) ∧ ⟨m^{β+1}⟩φ ≡ ⟨n^α⟩(⟨m^{β+1}⟩φ ∧ ψ) for m < n.
#[test]
fn successor_modalities_push_under_higher_bases() {
    let mut rng = rng(0x5eed_000c);
    for _ in 0..300 {
        let n = rng.gen_range(1..5);
        let m = rng.gen_range(0..n);
        let alpha = random_positive_ordinal(&mut rng, 2);
        let beta_succ = random_ordinal(&mut rng, 2) + Ordinal::one();
        let phi = random_formula(&mut rng, 3, 2);
        let psi = random_formula(&mut rng, 3, 2);
        let outside = Formula::and(
            Formula::diamond(n, alpha.clone(), Formula::and(phi.clone(), psi.clone())),
            Formula::diamond(m, beta_succ.clone(), phi.clone()),
        );
        let inside = Formula::diamond(
            n,
            alpha,
            Formula::and(Formula::diamond(m, beta_succ, phi), psi),
        );
        assert!(
            equivalent(&outside, &inside),
            "push equivalence failed: {outside} vs {inside}"
        );
    }
}

/// Strictly lower material with successor exponents absorbs into the
/// scope of a higher modality: ⟨n^α⟩φ ∧ ψ ≡ ⟨n^α⟩(φ ∧ ψ) for ψ ∈ F_{<n}
/// with successor exponents only.
#[test]
fn low_successor_conjuncts_absorb_into_higher_scopes() {
    let mut rng = rng(0x5eed_000d);
    for _ in 0..300 {
        let n = rng.gen_range(1..5);
        let alpha = random_positive_ordinal(&mut rng, 2);
        let phi = random_formula(&mut rng, 4, 2);
        let psi = random_successor_formula(&mut rng, n - 1, 2);
        let outside = Formula::and(Formula::diamond(n, alpha.clone(), phi.clone()), psi.clone());
        let inside = Formula::diamond(n, alpha, Formula::and(phi, psi));
        assert!(
            equivalent(&outside, &inside),
            "absorption failed: {outside} vs {inside}"
        );
    }
}

// -------------------------------------------------------------------
// Merge algebra and fragment queries.

#[test]
fn merging_is_commutative_associative_and_idempotent() {
    let mut rng = rng(0x5eed_000e);
    for _ in 0..300 {
        let a = random_mnf(&mut rng, 4, 2);
        let b = random_mnf(&mut rng, 4, 2);
        let c = random_mnf(&mut rng, 4, 2);
        assert_eq!(merge_mnf(&a, &b), merge_mnf(&b, &a));
        assert_eq!(
            merge_mnf(&merge_mnf(&a, &b), &c),
            merge_mnf(&a, &merge_mnf(&b, &c))
        );
        assert_eq!(merge_mnf(&a, &a), a);
    }
}

#[test]
fn consequence_bounds_are_tight() {
    let mut rng = rng(0x5eed_000f);
    for _ in 0..300 {
        let psi = random_mnf(&mut rng, 4, 2);
        let m = rng.gen_range(0..5);
        let bound = consequence_bound(&psi, m);
        let at_bound = Formula::diamond(m, bound.clone(), Formula::Top);
        assert!(
            decide(&embed(&psi), &at_bound).derivable,
            "bound not attained: {} |- {at_bound}",
            embed(&psi)
        );
        let beyond = Formula::diamond(m, bound + Ordinal::one(), Formula::Top);
        assert!(
            !decide(&embed(&psi), &beyond).derivable,
            "bound not maximal: {} |- {beyond}",
            embed(&psi)
        );
    }
}

#[test]
fn fragments_are_derivable_and_level_equivalent() {
    let mut rng = rng(0x5eed_0010);
    for _ in 0..300 {
        let psi = random_mnf(&mut rng, 5, 2);
        let n = rng.gen_range(0..6);
        let fragment = pi_fragment(&psi, n);
        assert!(
            decide(&embed(&psi), &embed(&fragment)).derivable,
            "fragment not derivable from {}",
            embed(&psi)
        );
        assert!(
            equiv_level(&embed(&psi), &embed(&fragment), n),
            "fragment changed level-{n} consequences of {}",
            embed(&psi)
        );
    }
}
