//! The decision procedure for derivability, and its corollaries.
//!
//! Between monomial normal forms, derivability has a complete
//! finite characterization: ψ₀ ⊢ ψ₁ holds iff
//!
//! 1. the largest base of ψ₁ does not exceed the largest base of ψ₀, and
//! 2. every monomial ⟨m^β⟩⊤ of ψ₁ satisfies β ≤ e^{n_i−m}(α_i), where
//!    ⟨n_i^{α_i}⟩⊤ is the ψ₀-monomial with the least base n_i ≥ m.
//!
//! Together with normalization this decides arbitrary sequents:
//! [`decide`] normalizes both sides and applies the characterization,
//! reporting the per-monomial bounds (or the first violated condition) in
//! a machine-readable [`Verdict`]. Two edge cases sit outside the stated
//! characterization and are fixed here once: a ⊤ succedent is always
//! derivable, and a ⊤ antecedent derives nothing but ⊤.
//!
//! The same bounds answer every other query in this module. The maximal γ
//! with ψ ⊢ ⟨m^γ⟩⊤ is [`consequence_bound`]; a formula's F_{<n+1}
//! consequences are captured by its monomial prefix through the least base
//! ≥ n ([`pi_fragment`]), and two formulas agree on all F_{<n+1}
//! consequences iff their bounds agree at every level ≤ n
//! ([`equiv_level`] — the fragment itself is infinite, but it is generated
//! by the monomials ⟨m^γ⟩⊤ with m ≤ n, so comparing bounds at each such m
//! is a complete check).

use crate::normalform::{normalize, Mnf};
use crate::ordinal::{hyper_exp, Ordinal};
use crate::syntax::Formula;
use serde::Serialize;

/// The bound computation for one succedent monomial: ⟨m^β⟩⊤ is entailed
/// iff β ≤ e^{n_i−m}(α_i) for the least antecedent base n_i ≥ m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    /// m: the base of the succedent monomial under test.
    pub succedent_base: u32,
    /// β: the exponent of that monomial.
    pub succedent_exponent: Ordinal,
    /// n_i: the least antecedent base ≥ m.
    pub matched_base: u32,
    /// e^{n_i−m}(α_i): the largest exponent derivable at base m.
    pub bound: Ordinal,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.succedent_exponent <= self.bound
    }
}

/// The evidence behind a [`Verdict`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    /// Derivable: every succedent monomial is within its bound (⊤ as a
    /// succedent yields an empty report list).
    Entailed { reports: Vec<BoundReport> },
    /// Not derivable: the succedent mentions a base above every
    /// antecedent base (condition 1; `antecedent_max_base` is `None` when
    /// the antecedent is ⊤ and has no bases at all).
    BaseOverflow {
        succedent_max_base: u32,
        antecedent_max_base: Option<u32>,
    },
    /// Not derivable: the first succedent monomial whose exponent exceeds
    /// its bound (condition 2).
    BoundExceeded { report: BoundReport },
}

/// The outcome of the decision procedure, with its evidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub derivable: bool,
    pub reason: Reason,
}

/// The ψ₀-monomial with the least base ≥ m, and the bound it induces at
/// base m.
fn matching_bound(psi: &Mnf, m: u32) -> Option<(u32, Ordinal)> {
    psi.monomials()
        .iter()
        .find(|candidate| candidate.base() >= m)
        .map(|candidate| {
            (
                candidate.base(),
                hyper_exp(candidate.base() - m, candidate.exponent()),
            )
        })
}

/// Decides ψ₀ ⊢ ψ₁ between monomial normal forms by the characterization
/// described in the module docs.
pub fn decide_mnf(psi0: &Mnf, psi1: &Mnf) -> Verdict {
    let Some(succedent_max) = psi1.monomials().last().map(|m| m.base()) else {
        return Verdict {
            derivable: true,
            reason: Reason::Entailed {
                reports: Vec::new(),
            },
        };
    };
    let antecedent_max = psi0.monomials().last().map(|m| m.base());
    if antecedent_max.is_none_or(|max| succedent_max > max) {
        return Verdict {
            derivable: false,
            reason: Reason::BaseOverflow {
                succedent_max_base: succedent_max,
                antecedent_max_base: antecedent_max,
            },
        };
    }
    let mut reports = Vec::with_capacity(psi1.len());
    for m in psi1.monomials() {
        let (matched_base, bound) =
            matching_bound(psi0, m.base()).expect("base condition already checked");
        let report = BoundReport {
            succedent_base: m.base(),
            succedent_exponent: m.exponent().clone(),
            matched_base,
            bound,
        };
        if !report.holds() {
            return Verdict {
                derivable: false,
                reason: Reason::BoundExceeded { report },
            };
        }
        reports.push(report);
    }
    Verdict {
        derivable: true,
        reason: Reason::Entailed { reports },
    }
}

/// Decides φ ⊢ ψ for arbitrary formulas by normalizing both sides first.
pub fn decide(phi: &Formula, psi: &Formula) -> Verdict {
    decide_mnf(&normalize(phi), &normalize(psi))
}

/// True iff φ ≡ ψ. By MNF uniqueness this is simply structural equality
/// of the normal forms, and coincides with [`decide`] holding both ways.
pub fn equivalent(phi: &Formula, psi: &Formula) -> bool {
    normalize(phi) == normalize(psi)
}

/// The maximal γ with ψ ⊢ ⟨m^γ⟩⊤: the bound e^{n_i−m}(α_i) induced by the
/// least base n_i ≥ m, or 0 when every base of ψ is below m (⊤ proves
/// only ⟨m^0⟩⊤ = ⊤).
pub fn consequence_bound(psi: &Mnf, m: u32) -> Ordinal {
    matching_bound(psi, m).map_or_else(Ordinal::zero, |(_, bound)| bound)
}

/// The Π-fragment of ψ at level n: the monomial prefix up to and
/// including the first base ≥ n, or all of ψ when no such base exists.
/// The result is a valid MNF, is derivable from ψ, and has the same
/// F_{<n+1} consequences as ψ.
pub fn pi_fragment(psi: &Mnf, n: u32) -> Mnf {
    match psi.monomials().iter().position(|m| m.base() >= n) {
        None => psi.clone(),
        Some(j) => Mnf::new(psi.monomials()[..=j].to_vec())
            .expect("a prefix of a valid MNF is a valid MNF"),
    }
}

/// True iff φ ≡ₙ ψ: the two formulas have exactly the same consequences
/// in the fragment F_{<n+1}, checked by comparing consequence bounds at
/// every base m ≤ n.
pub fn equiv_level(phi: &Formula, psi: &Formula, n: u32) -> bool {
    let (psi0, psi1) = (normalize(phi), normalize(psi));
    (0..=n).all(|m| consequence_bound(&psi0, m) == consequence_bound(&psi1, m))
}
