//! Monomial and increasing normal forms.
//!
//! A *monomial* is a single modality applied to ⊤, written ⟨n^α⟩⊤ with
//! α > 0. A *monomial normal form* (MNF) is a conjunction
//! ⟨n₀^{α₀}⟩⊤ ∧ … ∧ ⟨n_k^{α_k}⟩⊤ with strictly ascending bases in which
//! each exponent dominates its successor: α_i = e^{n_{i+1}−n_i}(α_{i+1})·(2+β)
//! for some β, i.e. left-dividing α_i by the *threshold*
//! μ = e^{n_{i+1}−n_i}(α_{i+1}) leaves a quotient ≥ 2. An *increasing
//! normal form* (INF) is a worm ⟨n₀^{β₀}⟩…⟨n_k^{β_k}⟩⊤ with strictly
//! ascending bases and positive exponents. The empty conjunction and the
//! empty worm are both ⊤.
//!
//! The two forms carry the same information and the conversions both ways
//! are exact inverses:
//!
//! * [`mnf_to_inf`] (the operation I) keeps the last exponent and replaces
//!   each earlier one by −1 + α_i / e^{n_{i+1}−n_i}(α_{i+1});
//! * [`inf_to_mnf`] (the operation M) rebuilds right-to-left via
//!   α_i = e^{n_{i+1}−n_i}(α_{i+1})·(1+β_i).
//!
//! Everything else here is the machinery that makes MNFs *canonical*
//! representatives of arbitrary formulas:
//!
//! * [`insert_monomial`] places one monomial in front of an MNF it may
//!   clash with, by absorbing it below the head's threshold or truncating
//!   its Cantor normal form at the threshold;
//! * [`merge_mnf`] conjoins two MNFs by folding insertions largest-base
//!   first;
//! * [`push_modality`] computes an MNF for ⟨n^α⟩ψ, peeling PS1 by-products
//!   off monomials with bases below n and dispatching on the first base
//!   ≥ n (co-additivity for an equal final base, the PS2 head extension
//!   for an equal base with successors, the Schmerl axiom for a larger
//!   base);
//! * [`normalize`] recurses over any formula with these primitives,
//!   eliding zero exponents, and lands on the unique MNF equivalent to it
//!   in the calculus.

use crate::ordinal::{hyper_exp, Ordinal};
use crate::syntax::{Formula, Worm};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

/// A single modality over ⊤: ⟨base^exponent⟩⊤ with exponent > 0.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    base: u32,
    exponent: Ordinal,
}

/// A monomial normal form: monomials with strictly ascending bases where
/// every exponent clears its successor's threshold with quotient ≥ 2.
/// Empty = ⊤. The invariants hold by construction for every value of this
/// type.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mnf {
    monomials: Vec<Monomial>,
}

/// An increasing normal form: a worm with strictly ascending bases and
/// positive exponents. Empty = ⊤.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inf {
    modalities: Vec<Monomial>,
}

/// A would-be normal form that violates the defining invariants.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum InvariantViolation {
    #[error("monomial exponents must be strictly positive")]
    ZeroExponent,
    #[error("bases must be strictly ascending, got {prev} before {next}")]
    BaseOrder { prev: u32, next: u32 },
    #[error("MNF divisibility fails at <{base}^{exponent}>: not e^{height}({next_exponent}) times a quotient >= 2")]
    Divisibility {
        base: u32,
        exponent: Ordinal,
        height: u32,
        next_exponent: Ordinal,
    },
    #[error("not a conjunction of monomials")]
    Shape,
}

/// A call that breaks an operation's precondition.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PreconditionViolation {
    #[error("insert_monomial requires base {base} <= head base {head}")]
    BaseAboveHead { base: u32, head: u32 },
    #[error("push_modality requires a strictly positive exponent")]
    ZeroExponent,
}

impl Monomial {
    pub fn new(base: u32, exponent: Ordinal) -> Result<Monomial, InvariantViolation> {
        if exponent.is_zero() {
            return Err(InvariantViolation::ZeroExponent);
        }
        Ok(Monomial { base, exponent })
    }

    /// Internal constructor for exponents that are positive by
    /// construction.
    fn positive(base: u32, exponent: Ordinal) -> Monomial {
        debug_assert!(!exponent.is_zero());
        Monomial { base, exponent }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn exponent(&self) -> &Ordinal {
        &self.exponent
    }

    /// The monomial as a formula, ⟨base^exponent⟩⊤.
    pub fn to_formula(&self) -> Formula {
        Formula::diamond(self.base, self.exponent.clone(), Formula::Top)
    }
}

/// Shared validation for both normal forms; `check_divisibility`
/// distinguishes MNF from INF.
fn validate(monomials: &[Monomial], check_divisibility: bool) -> Result<(), InvariantViolation> {
    for pair in monomials.windows(2) {
        let (current, next) = (&pair[0], &pair[1]);
        if current.base >= next.base {
            return Err(InvariantViolation::BaseOrder {
                prev: current.base,
                next: next.base,
            });
        }
        if check_divisibility {
            let height = next.base - current.base;
            let threshold = hyper_exp(height, &next.exponent);
            let quotient = current.exponent.left_divide(&threshold);
            if !quotient.is_ok_and(|q| q >= Ordinal::natural(2u32)) {
                return Err(InvariantViolation::Divisibility {
                    base: current.base,
                    exponent: current.exponent.clone(),
                    height,
                    next_exponent: next.exponent.clone(),
                });
            }
        }
    }
    Ok(())
}

impl Mnf {
    /// The empty MNF, ⊤.
    pub fn top() -> Mnf {
        Mnf::default()
    }

    /// Validates the MNF invariants and takes ownership of the monomials.
    pub fn new(monomials: Vec<Monomial>) -> Result<Mnf, InvariantViolation> {
        validate(&monomials, true)?;
        Ok(Mnf { monomials })
    }

    /// Internal constructor for monomial sequences that are valid by
    /// construction.
    fn from_valid(monomials: Vec<Monomial>) -> Mnf {
        debug_assert!(validate(&monomials, true).is_ok());
        Mnf { monomials }
    }

    /// Recognizes a formula that already is an MNF: ⊤, a monomial, or a
    /// right-nested conjunction of monomials satisfying the invariants.
    /// This is a literal check — no normalization, no zero-exponent
    /// elision.
    pub fn from_formula(f: &Formula) -> Result<Mnf, InvariantViolation> {
        fn monomial_of(conjunct: &Formula) -> Result<Monomial, InvariantViolation> {
            match conjunct {
                Formula::Diamond(n, alpha, body) if **body == Formula::Top => {
                    Monomial::new(*n, alpha.clone())
                }
                _ => Err(InvariantViolation::Shape),
            }
        }
        if *f == Formula::Top {
            return Ok(Mnf::top());
        }
        let mut monomials = Vec::new();
        let mut rest = f;
        while let Formula::And(l, r) = rest {
            monomials.push(monomial_of(l)?);
            rest = r;
        }
        monomials.push(monomial_of(rest)?);
        Mnf::new(monomials)
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_top(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn head(&self) -> Option<&Monomial> {
        self.monomials.first()
    }

    /// The MNF without its head monomial. A suffix of an MNF is an MNF.
    pub fn tail(&self) -> Mnf {
        Mnf {
            monomials: self.monomials.get(1..).unwrap_or_default().to_vec(),
        }
    }

    /// Embeds the MNF back into the formula language as a right-nested
    /// `/\`-chain (⊤ when empty).
    pub fn to_formula(&self) -> Formula {
        let mut it = self.monomials.iter().rev();
        let Some(last) = it.next() else {
            return Formula::Top;
        };
        it.fold(last.to_formula(), |acc, m| Formula::and(m.to_formula(), acc))
    }
}

impl Inf {
    /// The empty INF, ⊤.
    pub fn top() -> Inf {
        Inf::default()
    }

    /// Validates the INF invariants and takes ownership of the modalities.
    pub fn new(modalities: Vec<Monomial>) -> Result<Inf, InvariantViolation> {
        validate(&modalities, false)?;
        Ok(Inf { modalities })
    }

    /// Recognizes a worm that already is an INF: strictly ascending bases,
    /// positive exponents.
    pub fn from_worm(w: &Worm) -> Result<Inf, InvariantViolation> {
        let modalities = w
            .modalities
            .iter()
            .map(|(n, alpha)| Monomial::new(*n, alpha.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Inf::new(modalities)
    }

    pub fn modalities(&self) -> &[Monomial] {
        &self.modalities
    }

    pub fn is_top(&self) -> bool {
        self.modalities.is_empty()
    }

    pub fn len(&self) -> usize {
        self.modalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modalities.is_empty()
    }

    /// The INF without its outermost modality. A suffix of an INF is an
    /// INF.
    pub fn tail(&self) -> Inf {
        Inf {
            modalities: self.modalities.get(1..).unwrap_or_default().to_vec(),
        }
    }

    pub fn to_worm(&self) -> Worm {
        Worm {
            modalities: self
                .modalities
                .iter()
                .map(|m| (m.base, m.exponent.clone()))
                .collect(),
        }
    }

    pub fn to_formula(&self) -> Formula {
        self.to_worm().to_formula()
    }
}

/// True iff the formula is literally an MNF (⊤, a monomial, or a
/// right-nested conjunction of monomials meeting the invariants).
pub fn check_mnf(f: &Formula) -> bool {
    Mnf::from_formula(f).is_ok()
}

/// True iff the worm is literally an INF.
pub fn check_inf(w: &Worm) -> bool {
    Inf::from_worm(w).is_ok()
}

/// The operation I: converts an MNF to the INF with the same bases, by
/// β_k = α_k and β_i = −1 + α_i / e^{n_{i+1}−n_i}(α_{i+1}).
///
/// Total on [`Mnf`]: the divisibility invariant guarantees every quotient
/// exists and is ≥ 2, so −1 + quotient is ≥ 1.
pub fn mnf_to_inf(psi: &Mnf) -> Inf {
    let ms = psi.monomials();
    let mut modalities = Vec::with_capacity(ms.len());
    for (i, m) in ms.iter().enumerate() {
        let beta = match ms.get(i + 1) {
            None => m.exponent.clone(),
            Some(next) => {
                let threshold = hyper_exp(next.base - m.base, &next.exponent);
                let quotient = m
                    .exponent
                    .left_divide(&threshold)
                    .expect("MNF invariant: exponent divisible by threshold");
                quotient
                    .left_subtract(&Ordinal::one())
                    .expect("MNF invariant: quotient >= 2")
            }
        };
        modalities.push(Monomial::positive(m.base, beta));
    }
    Inf { modalities }
}

/// The operation M: converts an INF to the MNF with the same bases, by
/// α_k = β_k and, right-to-left, α_i = e^{n_{i+1}−n_i}(α_{i+1})·(1+β_i).
pub fn inf_to_mnf(a: &Inf) -> Mnf {
    let ws = a.modalities();
    let mut monomials: Vec<Monomial> = vec![Monomial::positive(0, Ordinal::one()); ws.len()];
    for (i, w) in ws.iter().enumerate().rev() {
        let alpha = match ws.get(i + 1) {
            None => w.exponent.clone(),
            Some(next) => {
                let threshold = hyper_exp(next.base - w.base, &monomials[i + 1].exponent);
                &threshold * &(&Ordinal::one() + &w.exponent)
            }
        };
        monomials[i] = Monomial::positive(w.base, alpha);
    }
    Mnf::from_valid(monomials)
}

/// Truncates β at an ω-power threshold μ = ω^δ, assuming β > μ: keeps the
/// Cantor normal form terms of β whose exponents are ≥ δ and closes with a
/// single μ. Since μ is additively indecomposable and β > μ, at least the
/// leading term survives, so the result is ≥ μ·2 when anything was cut
/// and β itself otherwise.
fn truncate_at_threshold(beta: &Ordinal, mu: &Ordinal) -> Ordinal {
    let delta = mu
        .omega_power_exponent()
        .expect("thresholds e^d(gamma) with d >= 1 are omega powers");
    let terms = beta.terms();
    match terms.iter().position(|(e, _)| e < delta) {
        None => beta.clone(),
        Some(j) => {
            debug_assert!(j >= 1, "beta > mu has a leading term >= mu");
            let prefix = Ordinal::from_terms(terms[..j].to_vec());
            &prefix + mu
        }
    }
}

/// Conjoins one monomial onto the front of an MNF, i.e. computes an MNF
/// equivalent to ⟨n^β⟩⊤ ∧ ψ for n at most ψ's head base.
///
/// For n strictly below the head base n₀ the threshold is
/// μ = e^{n₀−n}(α₀): a β ≤ μ is absorbed outright, anything larger is
/// truncated at μ (see [`truncate_at_threshold`]) and prepended. For
/// n equal to the head base, the larger exponent wins (exponent
/// monotonicity) and is re-inserted against the tail's threshold.
pub fn insert_monomial(m: &Monomial, psi: &Mnf) -> Result<Mnf, PreconditionViolation> {
    let Some(head) = psi.head() else {
        return Ok(Mnf::from_valid(vec![m.clone()]));
    };
    match m.base.cmp(&head.base) {
        Ordering::Greater => Err(PreconditionViolation::BaseAboveHead {
            base: m.base,
            head: head.base,
        }),
        Ordering::Equal => {
            if m.exponent <= head.exponent {
                Ok(psi.clone())
            } else {
                insert_monomial(m, &psi.tail())
            }
        }
        Ordering::Less => {
            let mu = hyper_exp(head.base - m.base, &head.exponent);
            if m.exponent <= mu {
                return Ok(psi.clone());
            }
            let exponent = truncate_at_threshold(&m.exponent, &mu);
            let mut monomials = Vec::with_capacity(psi.len() + 1);
            monomials.push(Monomial::positive(m.base, exponent));
            monomials.extend(psi.monomials.iter().cloned());
            Ok(Mnf::from_valid(monomials))
        }
    }
}

/// Folds a bag of monomials into an MNF, inserting from the largest base
/// down so [`insert_monomial`]'s precondition always holds.
fn fold_descending(mut monomials: Vec<Monomial>) -> Mnf {
    monomials.sort_by(|a, b| b.base.cmp(&a.base));
    monomials.into_iter().fold(Mnf::top(), |acc, m| {
        insert_monomial(&m, &acc).expect("descending fold keeps bases at or below the head")
    })
}

/// Conjoins two MNFs into the MNF equivalent to a ∧ b.
pub fn merge_mnf(a: &Mnf, b: &Mnf) -> Mnf {
    let mut monomials = Vec::with_capacity(a.len() + b.len());
    monomials.extend(a.monomials.iter().cloned());
    monomials.extend(b.monomials.iter().cloned());
    fold_descending(monomials)
}

/// Computes the MNF equivalent to ⟨n^α⟩ψ for α > 0.
///
/// Monomials of ψ with bases below n are passed one at a time, each
/// leaving a PS1 by-product ⟨n_i^{α_i + e^{n−n_i}(α)}⟩⊤ behind. At the
/// first base n_i ≥ n one of three principles fires: co-additivity
/// ⟨n^{α_i+α}⟩ when n = n_i ends the MNF, the PS2 head extension
/// ⟨n^{α_i + e^{n_{i+1}−n_i}(α_{i+1})·α}⟩ when n = n_i has successors, or
/// the Schmerl axiom ⟨n^{e^{n_i−n}(α_i)·(1+α)}⟩ when n < n_i; if ψ runs
/// out first the modality lands as the bare monomial ⟨n^α⟩⊤. The
/// by-products and the terminal monomials are then folded back into a
/// single MNF.
pub fn push_modality(n: u32, alpha: &Ordinal, psi: &Mnf) -> Result<Mnf, PreconditionViolation> {
    if alpha.is_zero() {
        return Err(PreconditionViolation::ZeroExponent);
    }
    let ms = psi.monomials();
    let split = ms.iter().position(|m| m.base >= n).unwrap_or(ms.len());
    let mut pending: Vec<Monomial> = ms[..split]
        .iter()
        .map(|m| Monomial::positive(m.base, &m.exponent + &hyper_exp(n - m.base, alpha)))
        .collect();
    match ms.get(split) {
        None => pending.push(Monomial::positive(n, alpha.clone())),
        Some(m) if m.base == n => match ms.get(split + 1) {
            None => pending.push(Monomial::positive(n, &m.exponent + alpha)),
            Some(next) => {
                let threshold = hyper_exp(next.base - n, &next.exponent);
                pending.push(Monomial::positive(n, &m.exponent + &(&threshold * alpha)));
                pending.extend(ms[split + 1..].iter().cloned());
            }
        },
        Some(m) => {
            let mu = hyper_exp(m.base - n, &m.exponent);
            pending.push(Monomial::positive(n, &mu * &(&Ordinal::one() + alpha)));
            pending.extend(ms[split..].iter().cloned());
        }
    }
    Ok(fold_descending(pending))
}

/// Normalizes an arbitrary formula to the unique MNF equivalent to it:
/// ⊤ is empty, conjunctions merge, zero-exponent modalities vanish (the
/// ⟨n⁰⟩φ = φ convention), and positive modalities are pushed onto the
/// normalized body.
pub fn normalize(f: &Formula) -> Mnf {
    match f {
        Formula::Top => Mnf::top(),
        Formula::And(l, r) => merge_mnf(&normalize(l), &normalize(r)),
        Formula::Diamond(_, alpha, body) if alpha.is_zero() => normalize(body),
        Formula::Diamond(n, alpha, body) => push_modality(*n, alpha, &normalize(body))
            .expect("exponent is nonzero in this branch"),
    }
}

/// Normalizes a formula all the way to its INF.
pub fn normalize_to_inf(f: &Formula) -> Inf {
    mnf_to_inf(&normalize(f))
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

impl fmt::Display for Mnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

impl fmt::Display for Inf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial({self})")
    }
}

impl fmt::Debug for Mnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mnf({self})")
    }
}

impl fmt::Debug for Inf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Inf({self})")
    }
}

impl serde::Serialize for Mnf {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl serde::Serialize for Inf {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
