//! Shared generators and reference oracles for the integration suites.
//!
//! Everything is driven by a seeded ChaCha stream so failures reproduce
//! exactly; no test uses entropy from the environment.

#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use tsc::normalform::{Inf, Mnf, Monomial};
use tsc::ordinal::hyper_exp;
use tsc::{Formula, Ordinal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random ordinal whose exponent tree nests at most `depth` levels:
/// depth 0 yields naturals, depth d sums a few terms ω^e·c with e drawn
/// at depth d−1.
pub fn random_ordinal(rng: &mut ChaCha8Rng, depth: u32) -> Ordinal {
    if depth == 0 || rng.gen_bool(0.25) {
        return Ordinal::natural(rng.gen_range(0u32..6));
    }
    let terms = rng.gen_range(1..=3);
    let mut exponents: Vec<Ordinal> = (0..terms)
        .map(|_| random_ordinal(rng, depth - 1))
        .collect();
    exponents.sort_by(|a, b| b.cmp(a));
    let mut out = Ordinal::zero();
    for e in exponents {
        out = out + Ordinal::omega_power(e) * Ordinal::natural(rng.gen_range(1u32..4));
    }
    if rng.gen_bool(0.5) {
        out = out + Ordinal::natural(rng.gen_range(0u32..4));
    }
    out
}

/// Like [`random_ordinal`] but never zero.
pub fn random_positive_ordinal(rng: &mut ChaCha8Rng, depth: u32) -> Ordinal {
    let candidate = random_ordinal(rng, depth);
    if candidate.is_zero() {
        Ordinal::natural(rng.gen_range(1u32..4))
    } else {
        candidate
    }
}

/// A uniform-ish random ordinal ≤ `bound`: keep a prefix of the CNF
/// terms, shrink the coefficient at the cut, and occasionally return the
/// bound itself or zero.
pub fn random_at_most(rng: &mut ChaCha8Rng, bound: &Ordinal) -> Ordinal {
    if bound.is_zero() || rng.gen_bool(0.2) {
        return bound.clone();
    }
    if rng.gen_bool(0.1) {
        return Ordinal::zero();
    }
    let terms = bound.terms();
    let cut = rng.gen_range(0..terms.len());
    let mut out = Ordinal::zero();
    for (exponent, coefficient) in &terms[..cut] {
        out = out + Ordinal::omega_power(exponent.clone()) * Ordinal::natural(coefficient.clone());
    }
    let (exponent, coefficient) = &terms[cut];
    let shrunk = sample_coefficient(rng, coefficient);
    if !shrunk.is_zero() {
        out = out + Ordinal::omega_power(exponent.clone()) * Ordinal::natural(shrunk);
    }
    out
}

fn sample_coefficient(rng: &mut ChaCha8Rng, coefficient: &BigUint) -> BigUint {
    let cap = u64::try_from(coefficient).unwrap_or(u64::MAX);
    BigUint::from(rng.gen_range(0..=cap))
}

/// A random increasing normal form: strictly ascending bases ≤
/// `max_base`, positive exponents of bounded depth.
pub fn random_inf(rng: &mut ChaCha8Rng, max_base: u32, depth: u32) -> Inf {
    let mut bases: Vec<u32> = (0..=max_base).collect();
    for i in (1..bases.len()).rev() {
        bases.swap(i, rng.gen_range(0..=i));
    }
    let count = rng.gen_range(0..=(max_base as usize + 1).min(4));
    let mut bases: Vec<u32> = bases.into_iter().take(count).collect();
    bases.sort_unstable();
    let modalities = bases
        .into_iter()
        .map(|base| {
            Monomial::new(base, random_positive_ordinal(rng, depth)).expect("positive exponent")
        })
        .collect();
    Inf::new(modalities).expect("ascending bases")
}

/// A random monomial normal form, built right to left so every exponent
/// clears its successor's hyper-exponential threshold with quotient ≥ 2.
pub fn random_mnf(rng: &mut ChaCha8Rng, max_base: u32, depth: u32) -> Mnf {
    let skeleton = random_inf(rng, max_base, depth);
    let mut monomials: Vec<Monomial> = Vec::with_capacity(skeleton.len());
    for m in skeleton.modalities().iter().rev() {
        let exponent = match monomials.last() {
            None => m.exponent().clone(),
            Some(next) => {
                let threshold = hyper_exp(next.base() - m.base(), next.exponent());
                let quotient = Ordinal::natural(2u32) + random_ordinal(rng, 1);
                threshold * quotient
            }
        };
        monomials.push(Monomial::new(m.base(), exponent).expect("positive exponent"));
    }
    monomials.reverse();
    Mnf::new(monomials).expect("thresholds hold by construction")
}

/// A random formula over bases ≤ `max_base` nesting at most `depth`
/// connectives, with occasional ⊤ leaves and zero exponents.
pub fn random_formula(rng: &mut ChaCha8Rng, max_base: u32, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.15) {
        return if rng.gen_bool(0.5) {
            Formula::Top
        } else {
            Monomial::new(
                rng.gen_range(0..=max_base),
                random_positive_ordinal(rng, 2),
            )
            .expect("positive exponent")
            .to_formula()
        };
    }
    if rng.gen_bool(0.6) {
        let exponent = if rng.gen_bool(0.05) {
            Ordinal::zero()
        } else {
            random_positive_ordinal(rng, 2)
        };
        Formula::diamond(
            rng.gen_range(0..=max_base),
            exponent,
            random_formula(rng, max_base, depth - 1),
        )
    } else {
        Formula::and(
            random_formula(rng, max_base, depth - 1),
            random_formula(rng, max_base, depth - 1),
        )
    }
}

/// Like [`random_formula`] but every modality carries a successor
/// exponent.
pub fn random_successor_formula(rng: &mut ChaCha8Rng, max_base: u32, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.4) {
            Formula::Top
        } else {
            Formula::diamond(
                rng.gen_range(0..=max_base),
                random_ordinal(rng, 2) + Ordinal::one(),
                Formula::Top,
            )
        };
    }
    if rng.gen_bool(0.6) {
        Formula::diamond(
            rng.gen_range(0..=max_base),
            random_ordinal(rng, 2) + Ordinal::one(),
            random_successor_formula(rng, max_base, depth - 1),
        )
    } else {
        Formula::and(
            random_successor_formula(rng, max_base, depth - 1),
            random_successor_formula(rng, max_base, depth - 1),
        )
    }
}

/// A random worm ⟨n_1^{α_1}⟩…⟨n_k^{α_k}⟩ applied to `body`.
pub fn random_worm_over(
    rng: &mut ChaCha8Rng,
    max_base: u32,
    length: usize,
    body: Formula,
) -> Formula {
    (0..length).fold(body, |acc, _| {
        Formula::diamond(
            rng.gen_range(0..=max_base),
            random_positive_ordinal(rng, 2),
            acc,
        )
    })
}

/// A succedent formula derivable from `antecedent` by construction: a
/// shuffled conjunction where every conjunct lowers the base and shrinks
/// the exponent of some antecedent monomial within its hyper-exponential
/// bound.
pub fn decide_yes_succedent(rng: &mut ChaCha8Rng, antecedent: &Mnf) -> Formula {
    let monomials = antecedent.monomials();
    if monomials.is_empty() {
        return Formula::Top;
    }
    let picks = rng.gen_range(0..=monomials.len().min(3));
    let mut conjuncts: Vec<Formula> = Vec::with_capacity(picks);
    for _ in 0..picks {
        let source = &monomials[rng.gen_range(0..monomials.len())];
        let target_base = rng.gen_range(0..=source.base());
        let bound = hyper_exp(source.base() - target_base, source.exponent());
        let exponent = random_at_most(rng, &bound);
        conjuncts.push(Formula::diamond(target_base, exponent, Formula::Top));
    }
    let mut out = Formula::Top;
    for c in conjuncts {
        out = if matches!(out, Formula::Top) {
            c
        } else if rng.gen_bool(0.5) {
            Formula::and(c, out)
        } else {
            Formula::and(out, c)
        };
    }
    out
}

// ---------------------------------------------------------------------
// Equivalence-preserving scrambling.

/// Splits a positive exponent at a random unit-term boundary, yielding
/// (inner, outer) with inner + outer equal to the original and both
/// positive; `None` when the exponent is a single unit.
pub fn split_exponent(rng: &mut ChaCha8Rng, alpha: &Ordinal) -> Option<(Ordinal, Ordinal)> {
    let units: Vec<Ordinal> = alpha.cnf_terms().take(64).collect();
    if units.len() < 2 {
        return None;
    }
    let cut = rng.gen_range(1..units.len());
    let sum = |part: &[Ordinal]| {
        part.iter()
            .fold(Ordinal::zero(), |acc, u| acc + u.clone())
    };
    Some((sum(&units[..cut]), sum(&units[cut..])))
}

/// The Schmerl expansion of ⟨n^α⟩ψ when ψ is literally a normal form
/// headed above n.
pub fn schmerl_expansion(n: u32, alpha: &Ordinal, body: &Formula) -> Option<Formula> {
    if alpha.is_zero() {
        return None;
    }
    let psi = Mnf::from_formula(body).ok()?;
    let head = psi.head()?;
    if head.base() <= n {
        return None;
    }
    let mu = hyper_exp(head.base() - n, head.exponent());
    let expanded = mu * (Ordinal::one() + alpha.clone());
    Some(Formula::and(
        Formula::diamond(n, expanded, Formula::Top),
        body.clone(),
    ))
}

/// One random sound rewrite applied somewhere in the formula: conjunct
/// swaps and rotations, ⊤ padding, degenerate-modality padding,
/// co-additive splits of a modality, or a Schmerl expansion. The result
/// is provably equivalent to the input.
fn rewrite_once(rng: &mut ChaCha8Rng, f: &Formula) -> Formula {
    // Descend to a random node first, then try transforms at it.
    match f {
        Formula::And(l, r) if rng.gen_bool(0.6) => {
            if rng.gen_bool(0.5) {
                Formula::and(rewrite_once(rng, l), (**r).clone())
            } else {
                Formula::and((**l).clone(), rewrite_once(rng, r))
            }
        }
        Formula::Diamond(n, alpha, body) if rng.gen_bool(0.5) => {
            Formula::diamond(*n, alpha.clone(), rewrite_once(rng, body))
        }
        _ => transform_node(rng, f),
    }
}

fn transform_node(rng: &mut ChaCha8Rng, f: &Formula) -> Formula {
    for _ in 0..4 {
        match rng.gen_range(0..6) {
            // Commute a conjunction.
            0 => {
                if let Formula::And(l, r) = f {
                    return Formula::and((**r).clone(), (**l).clone());
                }
            }
            // Rotate an association.
            1 => {
                if let Formula::And(l, r) = f {
                    if let Formula::And(rl, rr) = &**r {
                        return Formula::and(
                            Formula::and((**l).clone(), (**rl).clone()),
                            (**rr).clone(),
                        );
                    }
                    if let Formula::And(ll, lr) = &**l {
                        return Formula::and(
                            (**ll).clone(),
                            Formula::and((**lr).clone(), (**r).clone()),
                        );
                    }
                }
            }
            // Pad with ⊤ or a degenerate modality.
            2 => {
                return if rng.gen_bool(0.5) {
                    Formula::and(f.clone(), Formula::Top)
                } else {
                    Formula::diamond(rng.gen_range(0..3), Ordinal::zero(), f.clone())
                };
            }
            // Split a modality co-additively: ⟨n^{γ+β}⟩φ into ⟨n^β⟩⟨n^γ⟩φ.
            3 => {
                if let Formula::Diamond(n, alpha, body) = f {
                    if let Some((inner, outer)) = split_exponent(rng, alpha) {
                        return Formula::diamond(
                            *n,
                            outer,
                            Formula::diamond(*n, inner, (**body).clone()),
                        );
                    }
                }
            }
            // Merge a co-additive pair back.
            4 => {
                if let Formula::Diamond(n, outer, body) = f {
                    if let Formula::Diamond(n2, inner, innermost) = &**body {
                        if n2 == n && !outer.is_zero() && !inner.is_zero() {
                            return Formula::diamond(
                                *n,
                                inner.clone() + outer.clone(),
                                (**innermost).clone(),
                            );
                        }
                    }
                }
            }
            // Expand by the Schmerl axiom.
            _ => {
                if let Formula::Diamond(n, alpha, body) = f {
                    if let Some(expanded) = schmerl_expansion(*n, alpha, body) {
                        return expanded;
                    }
                }
            }
        }
    }
    // Nothing applied at this node; padding is always sound.
    Formula::and(Formula::Top, f.clone())
}

/// Applies `rounds` random sound rewrites; the result always normalizes
/// to the same normal form as the input.
pub fn scramble(rng: &mut ChaCha8Rng, f: &Formula, rounds: usize) -> Formula {
    let mut out = f.clone();
    for _ in 0..rounds {
        out = rewrite_once(rng, &out);
    }
    out
}

// ---------------------------------------------------------------------
// Independent ordinal oracle below ω³.

/// An ordinal below ω³ as a polynomial ω²·a + ω·b + c — an independent
/// representation with its own arithmetic, used to cross-check the main
/// implementation on small values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Poly3 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl Poly3 {
    pub fn new(a: u64, b: u64, c: u64) -> Poly3 {
        Poly3 { a, b, c }
    }

    pub fn random(rng: &mut ChaCha8Rng) -> Poly3 {
        let small = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.3) {
                0
            } else {
                rng.gen_range(0..50)
            }
        };
        Poly3::new(small(rng), small(rng), small(rng))
    }

    pub fn is_zero(self) -> bool {
        self == Poly3::new(0, 0, 0)
    }

    fn degree(self) -> u32 {
        if self.a > 0 {
            2
        } else if self.b > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_ordinal(self) -> Ordinal {
        Ordinal::omega_power(Ordinal::natural(2u32)) * Ordinal::natural(self.a)
            + Ordinal::omega() * Ordinal::natural(self.b)
            + Ordinal::natural(self.c)
    }

    pub fn compare(self, other: Poly3) -> Ordering {
        (self.a, self.b, self.c).cmp(&(other.a, other.b, other.c))
    }

    /// Ordinal addition: the right operand's leading power erases the
    /// lower-order part of the left.
    pub fn add(self, other: Poly3) -> Poly3 {
        if other.a > 0 {
            Poly3::new(self.a + other.a, other.b, other.c)
        } else if other.b > 0 {
            Poly3::new(self.a, self.b + other.b, other.c)
        } else {
            Poly3::new(self.a, self.b, self.c + other.c)
        }
    }

    /// Ordinal multiplication, distributing over the right operand's
    /// terms; `None` when the product reaches ω³.
    pub fn mul(self, other: Poly3) -> Option<Poly3> {
        if self.is_zero() || other.is_zero() {
            return Some(Poly3::new(0, 0, 0));
        }
        let mut acc = Poly3::new(0, 0, 0);
        // x·ω^k·d for the ω²- and ω-terms of the right operand.
        for (k, d) in [(2u32, other.a), (1, other.b)] {
            if d == 0 {
                continue;
            }
            let degree = if self.degree() == 0 {
                k
            } else {
                self.degree() + k
            };
            if degree > 2 {
                return None;
            }
            let term = match degree {
                2 => Poly3::new(d, 0, 0),
                _ => Poly3::new(0, d, 0),
            };
            acc = acc.add(term);
        }
        if other.c > 0 {
            // x·c multiplies the leading coefficient and keeps the rest.
            let scaled = match self.degree() {
                2 => Poly3::new(self.a * other.c, self.b, self.c),
                1 => Poly3::new(0, self.b * other.c, self.c),
                _ => Poly3::new(0, 0, self.c * other.c),
            };
            acc = acc.add(scaled);
        }
        Some(acc)
    }

    /// The unique ξ with `prefix` + ξ = `self`, when `prefix` ≤ `self`.
    pub fn left_subtract(self, prefix: Poly3) -> Option<Poly3> {
        match prefix.a.cmp(&self.a) {
            Ordering::Greater => None,
            Ordering::Less => Some(Poly3::new(self.a - prefix.a, self.b, self.c)),
            Ordering::Equal => match prefix.b.cmp(&self.b) {
                Ordering::Greater => None,
                Ordering::Less => Some(Poly3::new(0, self.b - prefix.b, self.c)),
                Ordering::Equal => {
                    if prefix.c > self.c {
                        None
                    } else {
                        Some(Poly3::new(0, 0, self.c - prefix.c))
                    }
                }
            },
        }
    }

    /// The unique ξ with ω^`power`·ξ = `self`, when it exists
    /// (`power` ≤ 2).
    pub fn left_divide_omega_power(self, power: u32) -> Option<Poly3> {
        match power {
            0 => Some(self),
            1 => {
                if self.c != 0 {
                    None
                } else {
                    Some(Poly3::new(0, self.a, self.b))
                }
            }
            2 => {
                if self.c != 0 || self.b != 0 {
                    None
                } else {
                    Some(Poly3::new(0, 0, self.a))
                }
            }
            _ => None,
        }
    }
}
