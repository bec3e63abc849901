//! The proof system as data.
//!
//! A [`Derivation`] is a tree whose leaves are axiom instances (or
//! instances of the derived principles listed below) and whose internal
//! nodes are applications of the rules R1–R4. Checking is two-tier:
//!
//! * primitive axiom leaves and rule nodes are verified purely
//!   syntactically, by [`match_axiom`] and by re-running [`apply_rule`]
//!   with parameters recovered from the stored conclusion;
//! * leaves tagged with a derived principle — PS1, PS2, EqualBase (the
//!   paper-style pull of a modality over smaller, equal, or larger bases),
//!   ConNF (head truncation when a monomial meets a normal form), and
//!   MonoMax (absorption of a dominated monomial) — are verified by
//!   re-instantiating the principle's conclusion from its redex and
//!   comparing structurally, in either orientation. The principles are
//!   derivable in the calculus, so this keeps witnesses small without
//!   weakening the checker.
//!
//! [`derive_witness`] makes the completeness direction of the decision
//! procedure constructive: it replays normalization on both sides of a
//! sequent as a chain of single-position rewrites ([`normalize_traced`]
//! exposes the same chain as a [`Trace`]), bridges the two normal forms
//! with projection/Ax5/Ax3 chains per monomial, and composes everything
//! with cuts. The result always passes [`check_derivation`].
//!
//! [`saturate`] is an independent forward-chaining oracle: it enumerates
//! every axiom instance over a finite formula universe (bases, exponents
//! drawn from a fixed menu, and formula size all capped) and closes under
//! the rules up to a bounded derivation cost, counting rule applications
//! across the whole proof tree. It exists to cross-validate the decision
//! procedure on small instances, not to search for proofs.
//!
//! Throughout this module formulas are identified up to the ⟨n⁰⟩φ = φ
//! convention: public entry points elide zero exponents before matching,
//! and the witnesses they produce are stated over the elided formulas.

use crate::decision::{decide_mnf, Verdict};
use crate::normalform::{insert_monomial, merge_mnf, push_modality, Mnf, Monomial};
use crate::ordinal::{hyper_exp, Ordinal};
use crate::syntax::{Formula, Sequent};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// The tag on one derivation step: an axiom schema, an inference rule, or
/// a derived principle (checked by re-instantiation rather than schema
/// matching).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepKind {
    /// φ ⊢ φ.
    Ax1a,
    /// φ ⊢ ⊤.
    Ax1b,
    /// φ ∧ ψ ⊢ φ.
    Ax2L,
    /// φ ∧ ψ ⊢ ψ.
    Ax2R,
    /// ⟨n^α⟩φ ⊢ ⟨n^β⟩φ for β ≤ α.
    Ax3,
    /// ⟨n^{α+β}⟩φ ⊢ ⟨n^β⟩⟨n^α⟩φ (co-additivity, left to right).
    Ax4L,
    /// ⟨n^β⟩⟨n^α⟩φ ⊢ ⟨n^{α+β}⟩φ (co-additivity, right to left).
    Ax4R,
    /// ⟨(m+n)^α⟩φ ⊢ ⟨m^{e^n(α)}⟩φ.
    Ax5,
    /// ⟨n^α⟩ψ ⊢ ⟨n^{e^{n₀−n}(α₀)·(1+α)}⟩⊤ ∧ ψ for ψ ∈ MNF with head base
    /// n₀ > n (the Schmerl axiom, left to right).
    Ax6L,
    /// The Schmerl axiom, right to left.
    Ax6R,
    /// From φ⊢ψ and φ⊢χ conclude φ ⊢ ψ∧χ.
    R1,
    /// From φ⊢ψ and ψ⊢χ conclude φ⊢χ.
    R2,
    /// From φ⊢ψ conclude ⟨n^α⟩φ ⊢ ⟨n^α⟩ψ.
    R3,
    /// From φ⊢ψ conclude ⟨n^α⟩φ ∧ ⟨m^{β+1}⟩ψ ⊢ ⟨n^α⟩(φ ∧ ⟨m^{β+1}⟩ψ) for
    /// m < n.
    R4,
    /// ⟨n^α⟩(⟨n₀^{α₀}⟩⊤ ∧ M) ≡ ⟨n₀^{α₀+e^{n−n₀}(α)}⟩⊤ ∧ ⟨n^α⟩M for
    /// n > n₀ and M a conjunction of monomials (⊤ when empty).
    Ps1,
    /// ⟨n₀^α⟩ψ ≡ ⟨n₀^{α₀+e^{n₁−n₀}(α₁)·α}⟩⊤ ∧ tail(ψ) for ψ ∈ MNF with
    /// head base n₀ and at least two monomials.
    Ps2,
    /// ⟨n₀^α⟩ψ ≡ ⟨n₀^{α₀+e^{n₁−n₀}(α₁)·α}⟩⊤ ∧ ⟨n₀^α⟩tail(ψ): the
    /// proposition PS2 is a corollary of.
    EqualBase,
    /// ⟨n^β⟩⊤ ∧ ψ ≡ ψ' where ψ' re-heads ψ by truncating β at the head
    /// threshold (conjunction normalization, for n at most the head base).
    ConNf,
    /// ⟨n^β⟩⊤ ∧ ψ ≡ ψ when ψ already bounds ⟨n^β⟩⊤ (absorption by the
    /// maximum, a consequence of exponent monotonicity).
    MonoMax,
}

impl StepKind {
    /// How many premises a step of this kind takes.
    pub fn arity(self) -> usize {
        match self {
            StepKind::R1 | StepKind::R2 => 2,
            StepKind::R3 | StepKind::R4 => 1,
            _ => 0,
        }
    }

    /// True for the inference rules R1–R4.
    pub fn is_rule(self) -> bool {
        self.arity() > 0
    }

    /// True for the derived principles checked by re-instantiation.
    pub fn is_derived(self) -> bool {
        matches!(
            self,
            StepKind::Ps1
                | StepKind::Ps2
                | StepKind::EqualBase
                | StepKind::ConNf
                | StepKind::MonoMax
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            StepKind::Ax1a => "Ax1a",
            StepKind::Ax1b => "Ax1b",
            StepKind::Ax2L => "Ax2L",
            StepKind::Ax2R => "Ax2R",
            StepKind::Ax3 => "Ax3",
            StepKind::Ax4L => "Ax4L",
            StepKind::Ax4R => "Ax4R",
            StepKind::Ax5 => "Ax5",
            StepKind::Ax6L => "Ax6L",
            StepKind::Ax6R => "Ax6R",
            StepKind::R1 => "R1",
            StepKind::R2 => "R2",
            StepKind::R3 => "R3",
            StepKind::R4 => "R4",
            StepKind::Ps1 => "PS1",
            StepKind::Ps2 => "PS2",
            StepKind::EqualBase => "EqualBase",
            StepKind::ConNf => "ConNF",
            StepKind::MonoMax => "MonoMax",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl serde::Serialize for StepKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// A proof tree: a conclusion, the step that produced it, and the
/// subproofs of its premises (as many as the step's arity).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub conclusion: Sequent,
    pub kind: StepKind,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    /// Total number of nodes in the tree.
    pub fn len(&self) -> usize {
        1 + self.premises.iter().map(Derivation::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// One whole-formula rewrite performed by normalization.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TraceStep {
    pub before: Formula,
    pub after: Formula,
    pub kind: StepKind,
}

/// The chain of rewrites [`normalize_traced`] performed: consecutive
/// steps share formulas (`after` of one step is `before` of the next),
/// starting from the zero-elided input and ending at the normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

/// The instantiation data [`apply_rule`] needs beyond the premises:
/// nothing for R1/R2, the wrapping modality for R3, both modalities for
/// R4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleParams {
    None,
    /// R3: the modality ⟨base^exponent⟩ applied to both sides.
    Modality { base: u32, exponent: Ordinal },
    /// R4: the outer modality ⟨n^α⟩ on the kept conjunct and the inner
    /// modality ⟨m^{β+1}⟩ on the pushed one.
    Push {
        outer_base: u32,
        outer_exponent: Ordinal,
        inner_base: u32,
        inner_exponent: Ordinal,
    },
}

/// A rule application whose premises or parameters do not fit the rule's
/// shape or side conditions.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("cannot apply {kind}: {message}")]
pub struct RuleMismatch {
    pub kind: StepKind,
    pub message: String,
}

/// The first invalid node found by [`check_derivation`], addressed by the
/// premise indices leading to it from the root.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("invalid derivation at node {path:?}: {reason}")]
pub struct CheckError {
    pub path: Vec<usize>,
    pub reason: String,
}

/// Returned by [`derive_witness`] when the decision procedure refutes the
/// sequent; carries the verdict with the violated condition.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("the sequent is not derivable")]
pub struct NotDerivable {
    pub verdict: Verdict,
}

/// Saturation gave up because the closed set outgrew the configured
/// bound.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SaturationError {
    #[error("saturation exceeded the configured bound of {limit} sequents")]
    ResourceLimit { limit: usize },
}

/// How [`saturate_with`] schedules a round's rule applications. The
/// result is the same canonical set either way.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[cfg(feature = "parallel")]
    Rayon,
}

fn mono(base: u32, exponent: Ordinal) -> Monomial {
    Monomial::new(base, exponent).expect("exponent is positive by construction")
}

/// A formula seen as a monomial ⟨b^e⟩⊤, e > 0.
fn monomial_view(f: &Formula) -> Option<Monomial> {
    match f {
        Formula::Diamond(b, e, body) if **body == Formula::Top && !e.is_zero() => {
            Some(mono(*b, e.clone()))
        }
        _ => None,
    }
}

/// Splits a monomial-headed conjunction into its head and the rest; a
/// bare monomial has rest ⊤.
fn split_monomial_head(f: &Formula) -> Option<(Monomial, Formula)> {
    match f {
        Formula::And(l, r) => monomial_view(l).map(|m| (m, (*r.clone()))),
        _ => monomial_view(f).map(|m| (m, Formula::Top)),
    }
}

/// A right-nested conjunction of monomials; ⊤ counts as the empty
/// conjunction but may not appear as a conjunct.
fn conjunction_of_monomials(f: &Formula) -> bool {
    fn nonempty(f: &Formula) -> bool {
        match f {
            Formula::And(l, r) => monomial_view(l).is_some() && nonempty(r),
            _ => monomial_view(f).is_some(),
        }
    }
    *f == Formula::Top || nonempty(f)
}

/// The right-hand side of the Schmerl axiom for `f` = ⟨n^α⟩ψ with ψ a
/// valid nonempty MNF whose head base exceeds n, or `None` when `f` is
/// not of that shape.
fn ax6_image(f: &Formula) -> Option<Formula> {
    let Formula::Diamond(n, alpha, body) = f else {
        return None;
    };
    if alpha.is_zero() {
        return None;
    }
    let psi = Mnf::from_formula(body).ok()?;
    let head = psi.head()?;
    if *n >= head.base() {
        return None;
    }
    let mu = hyper_exp(head.base() - n, head.exponent());
    let gamma = &mu * &(&Ordinal::one() + alpha);
    Some(Formula::and(
        Formula::diamond(*n, gamma, Formula::Top),
        (**body).clone(),
    ))
}

/// The right-hand side of PS1 for `f` = ⟨n^α⟩(⟨n₀^{α₀}⟩⊤ ∧ M) with
/// n > n₀ and M a conjunction of monomials.
fn ps1_image(f: &Formula) -> Option<Formula> {
    let Formula::Diamond(n, alpha, body) = f else {
        return None;
    };
    if alpha.is_zero() {
        return None;
    }
    let (head, rest) = split_monomial_head(body)?;
    if *n <= head.base() || !conjunction_of_monomials(&rest) {
        return None;
    }
    let lifted = mono(
        head.base(),
        head.exponent() + &hyper_exp(n - head.base(), alpha),
    );
    Some(Formula::and(
        lifted.to_formula(),
        Formula::diamond(*n, alpha.clone(), rest),
    ))
}

/// The strengthened head ⟨n₀^{α₀+e^{n₁−n₀}(α₁)·α}⟩⊤ shared by PS2 and
/// the equal-base proposition, for `f` = ⟨n₀^α⟩ψ with ψ a valid MNF of
/// length ≥ 2 whose head base equals n₀.
fn equal_base_parts(f: &Formula) -> Option<(Formula, Ordinal, Mnf)> {
    let Formula::Diamond(n, alpha, body) = f else {
        return None;
    };
    if alpha.is_zero() {
        return None;
    }
    let psi = Mnf::from_formula(body).ok()?;
    if psi.len() < 2 || psi.head().map(Monomial::base) != Some(*n) {
        return None;
    }
    let next = &psi.monomials()[1];
    let theta = hyper_exp(next.base() - n, next.exponent());
    let head = psi.head().expect("nonempty");
    let new_head = mono(*n, head.exponent() + &(&theta * alpha));
    Some((new_head.to_formula(), alpha.clone(), psi))
}

fn equal_base_image(f: &Formula) -> Option<Formula> {
    let Formula::Diamond(n, ..) = f else {
        return None;
    };
    let n = *n;
    let (new_head, alpha, psi) = equal_base_parts(f)?;
    Some(Formula::and(
        new_head,
        Formula::diamond(n, alpha, psi.tail().to_formula()),
    ))
}

fn ps2_image(f: &Formula) -> Option<Formula> {
    let (new_head, _, psi) = equal_base_parts(f)?;
    Some(Formula::and(new_head, psi.tail().to_formula()))
}

/// True when `redex` = ⟨n^β⟩⊤ ∧ ψ for a valid nonempty MNF ψ and
/// `contractum` is the result of [`insert_monomial`]: absorption for
/// MonoMax, a re-headed normal form for ConNF.
fn insert_instance(kind: StepKind, redex: &Formula, contractum: &Formula) -> bool {
    let Some((m, rest)) = split_monomial_head(redex) else {
        return false;
    };
    let Ok(psi) = Mnf::from_formula(&rest) else {
        return false;
    };
    if psi.is_empty() {
        return false;
    }
    let Ok(result) = insert_monomial(&m, &psi) else {
        return false;
    };
    let absorbed = result == psi;
    let wanted = if kind == StepKind::MonoMax {
        absorbed
    } else {
        !absorbed
    };
    wanted && *contractum == result.to_formula()
}

/// All axiom schemas instantiating to the sequent exactly, under the
/// ⟨n⁰⟩φ = φ identification. Derived-principle tags are never reported
/// here; they are only checked as leaves of a [`Derivation`].
pub fn match_axiom(s: &Sequent) -> BTreeSet<StepKind> {
    let ant = s.antecedent.elide_zero_exponents();
    let suc = s.succedent.elide_zero_exponents();
    let mut out = BTreeSet::new();
    if ant == suc {
        out.insert(StepKind::Ax1a);
    }
    if suc == Formula::Top {
        out.insert(StepKind::Ax1b);
    }
    if let Formula::And(l, r) = &ant {
        if **l == suc {
            out.insert(StepKind::Ax2L);
        }
        if **r == suc {
            out.insert(StepKind::Ax2R);
        }
    }
    if let (Formula::Diamond(n, alpha, body), Formula::Diamond(m, beta, body2)) = (&ant, &suc) {
        if body == body2 {
            if n == m && *beta <= *alpha {
                out.insert(StepKind::Ax3);
            }
            if m <= n && *beta == hyper_exp(n - m, alpha) {
                out.insert(StepKind::Ax5);
            }
        }
        // Ax4L: ⟨n^{α+β}⟩φ ⊢ ⟨n^β⟩⟨n^α⟩φ.
        if n == m {
            if let Formula::Diamond(n2, inner, body3) = &**body2 {
                if n2 == n && body3 == body && *alpha == inner + beta {
                    out.insert(StepKind::Ax4L);
                }
            }
            // Ax4R: ⟨n^β⟩⟨n^α⟩φ ⊢ ⟨n^{α+β}⟩φ.
            if let Formula::Diamond(n2, inner, body3) = &**body {
                if n2 == n && body3 == body2 && *beta == inner + alpha {
                    out.insert(StepKind::Ax4R);
                }
            }
        }
    }
    if ax6_image(&ant).is_some_and(|image| image == suc) {
        out.insert(StepKind::Ax6L);
    }
    if ax6_image(&suc).is_some_and(|image| image == ant) {
        out.insert(StepKind::Ax6R);
    }
    out
}

/// Applies an inference rule to premise sequents, checking shapes and
/// side conditions. Premises are taken literally (no elision).
pub fn apply_rule(
    kind: StepKind,
    premises: &[Sequent],
    params: &RuleParams,
) -> Result<Sequent, RuleMismatch> {
    let fail = |message: &str| {
        Err(RuleMismatch {
            kind,
            message: message.to_string(),
        })
    };
    if !kind.is_rule() {
        return fail("not an inference rule");
    }
    if premises.len() != kind.arity() {
        return Err(RuleMismatch {
            kind,
            message: format!(
                "expected {} premises, got {}",
                kind.arity(),
                premises.len()
            ),
        });
    }
    match kind {
        StepKind::R1 => {
            let (p, q) = (&premises[0], &premises[1]);
            if p.antecedent != q.antecedent {
                return fail("the premises must share an antecedent");
            }
            Ok(Sequent::new(
                p.antecedent.clone(),
                Formula::and(p.succedent.clone(), q.succedent.clone()),
            ))
        }
        StepKind::R2 => {
            let (p, q) = (&premises[0], &premises[1]);
            if p.succedent != q.antecedent {
                return fail("the cut formula must match both premises");
            }
            Ok(Sequent::new(p.antecedent.clone(), q.succedent.clone()))
        }
        StepKind::R3 => {
            let RuleParams::Modality { base, exponent } = params else {
                return fail("R3 takes a modality parameter");
            };
            if exponent.is_zero() {
                return fail("the modality exponent must be positive");
            }
            let p = &premises[0];
            Ok(Sequent::new(
                Formula::diamond(*base, exponent.clone(), p.antecedent.clone()),
                Formula::diamond(*base, exponent.clone(), p.succedent.clone()),
            ))
        }
        StepKind::R4 => {
            let RuleParams::Push {
                outer_base,
                outer_exponent,
                inner_base,
                inner_exponent,
            } = params
            else {
                return fail("R4 takes both modality parameters");
            };
            if inner_base >= outer_base {
                return fail("requires m < n");
            }
            if outer_exponent.is_zero() {
                return fail("the outer exponent must be positive");
            }
            if !inner_exponent.is_successor() {
                return fail("the pushed exponent must be a successor");
            }
            let p = &premises[0];
            let pushed = Formula::diamond(
                *inner_base,
                inner_exponent.clone(),
                p.succedent.clone(),
            );
            Ok(Sequent::new(
                Formula::and(
                    Formula::diamond(*outer_base, outer_exponent.clone(), p.antecedent.clone()),
                    pushed.clone(),
                ),
                Formula::diamond(
                    *outer_base,
                    outer_exponent.clone(),
                    Formula::and(p.antecedent.clone(), pushed),
                ),
            ))
        }
        _ => unreachable!("is_rule filtered non-rules"),
    }
}

/// Verifies a proof tree: leaves must match their axiom schema or derived
/// principle, internal nodes must be exact rule applications (with
/// parameters recovered from the stored conclusion), and arities must
/// line up. Errors address the first failing node by its premise path.
pub fn check_derivation(d: &Derivation) -> Result<(), CheckError> {
    let mut path = Vec::new();
    check_node(d, &mut path)
}

fn check_node(d: &Derivation, path: &mut Vec<usize>) -> Result<(), CheckError> {
    let fail = |path: &[usize], reason: String| {
        Err(CheckError {
            path: path.to_vec(),
            reason,
        })
    };
    if d.premises.len() != d.kind.arity() {
        return fail(
            path,
            format!(
                "{} expects {} premises, got {}",
                d.kind,
                d.kind.arity(),
                d.premises.len()
            ),
        );
    }
    if d.kind.is_rule() {
        let params = match d.kind {
            StepKind::R3 => match &d.conclusion.antecedent {
                Formula::Diamond(n, alpha, _) => RuleParams::Modality {
                    base: *n,
                    exponent: alpha.clone(),
                },
                _ => return fail(path, "an R3 conclusion must modalize both sides".into()),
            },
            StepKind::R4 => match &d.conclusion.antecedent {
                Formula::And(l, r) => match (&**l, &**r) {
                    (Formula::Diamond(n, alpha, _), Formula::Diamond(m, beta, _)) => {
                        RuleParams::Push {
                            outer_base: *n,
                            outer_exponent: alpha.clone(),
                            inner_base: *m,
                            inner_exponent: beta.clone(),
                        }
                    }
                    _ => {
                        return fail(
                            path,
                            "an R4 conclusion must conjoin two modalized formulas".into(),
                        )
                    }
                },
                _ => {
                    return fail(
                        path,
                        "an R4 conclusion must conjoin two modalized formulas".into(),
                    )
                }
            },
            _ => RuleParams::None,
        };
        let premise_sequents: Vec<Sequent> =
            d.premises.iter().map(|p| p.conclusion.clone()).collect();
        match apply_rule(d.kind, &premise_sequents, &params) {
            Ok(expected) if expected == d.conclusion => {}
            Ok(_) => {
                return fail(
                    path,
                    format!("the conclusion does not follow from the premises by {}", d.kind),
                )
            }
            Err(e) => return fail(path, e.message),
        }
    } else if d.kind.is_derived() {
        let ant = d.conclusion.antecedent.elide_zero_exponents();
        let suc = d.conclusion.succedent.elide_zero_exponents();
        let image = |f: &Formula| match d.kind {
            StepKind::Ps1 => ps1_image(f),
            StepKind::Ps2 => ps2_image(f),
            StepKind::EqualBase => equal_base_image(f),
            _ => None,
        };
        let ok = match d.kind {
            StepKind::ConNf | StepKind::MonoMax => {
                insert_instance(d.kind, &ant, &suc) || insert_instance(d.kind, &suc, &ant)
            }
            _ => {
                image(&ant).is_some_and(|img| img == suc)
                    || image(&suc).is_some_and(|img| img == ant)
            }
        };
        if !ok {
            return fail(
                path,
                format!("the conclusion is not an instance of {}", d.kind),
            );
        }
    } else if !match_axiom(&d.conclusion).contains(&d.kind) {
        return fail(
            path,
            format!("the conclusion does not match the {} schema", d.kind),
        );
    }
    for (i, premise) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(premise, path)?;
        path.pop();
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Derivation builders.

fn leaf(kind: StepKind, antecedent: Formula, succedent: Formula) -> Derivation {
    Derivation {
        conclusion: Sequent::new(antecedent, succedent),
        kind,
        premises: Vec::new(),
    }
}

fn identity(f: Formula) -> Derivation {
    leaf(StepKind::Ax1a, f.clone(), f)
}

fn is_identity(d: &Derivation) -> bool {
    d.kind == StepKind::Ax1a && d.conclusion.antecedent == d.conclusion.succedent
}

fn r1_node(left: Derivation, right: Derivation) -> Derivation {
    debug_assert_eq!(left.conclusion.antecedent, right.conclusion.antecedent);
    let conclusion = Sequent::new(
        left.conclusion.antecedent.clone(),
        Formula::and(
            left.conclusion.succedent.clone(),
            right.conclusion.succedent.clone(),
        ),
    );
    Derivation {
        conclusion,
        kind: StepKind::R1,
        premises: vec![left, right],
    }
}

fn r2_node(left: Derivation, right: Derivation) -> Derivation {
    debug_assert_eq!(left.conclusion.succedent, right.conclusion.antecedent);
    let conclusion = Sequent::new(
        left.conclusion.antecedent.clone(),
        right.conclusion.succedent.clone(),
    );
    Derivation {
        conclusion,
        kind: StepKind::R2,
        premises: vec![left, right],
    }
}

/// Cut that drops identity premises instead of stacking them.
fn compose(left: Derivation, right: Derivation) -> Derivation {
    if is_identity(&left) {
        return right;
    }
    if is_identity(&right) {
        return left;
    }
    r2_node(left, right)
}

fn r3_node(base: u32, exponent: &Ordinal, premise: Derivation) -> Derivation {
    let conclusion = Sequent::new(
        Formula::diamond(base, exponent.clone(), premise.conclusion.antecedent.clone()),
        Formula::diamond(base, exponent.clone(), premise.conclusion.succedent.clone()),
    );
    Derivation {
        conclusion,
        kind: StepKind::R3,
        premises: vec![premise],
    }
}

/// One single-position rewrite with proofs in both directions; the
/// building block for traces and equivalence chains.
#[derive(Clone)]
struct Rewrite {
    before: Formula,
    after: Formula,
    kind: StepKind,
    /// before ⊢ after.
    forward: Derivation,
    /// after ⊢ before.
    backward: Derivation,
}

/// A rewrite whose both directions are leaves of the same derived
/// principle.
fn derived_rewrite(kind: StepKind, before: Formula, after: Formula) -> Rewrite {
    Rewrite {
        forward: leaf(kind, before.clone(), after.clone()),
        backward: leaf(kind, after.clone(), before.clone()),
        before,
        after,
        kind,
    }
}

/// Lifts a rewrite of X into And(X, right): the left conjunct changes,
/// the right rides along.
fn lift_left(rw: Rewrite, right: &Formula) -> Rewrite {
    let before = Formula::and(rw.before.clone(), right.clone());
    let after = Formula::and(rw.after.clone(), right.clone());
    let forward = r1_node(
        compose(
            leaf(StepKind::Ax2L, before.clone(), rw.before.clone()),
            rw.forward,
        ),
        leaf(StepKind::Ax2R, before.clone(), right.clone()),
    );
    let backward = r1_node(
        compose(
            leaf(StepKind::Ax2L, after.clone(), rw.after.clone()),
            rw.backward,
        ),
        leaf(StepKind::Ax2R, after.clone(), right.clone()),
    );
    Rewrite {
        before,
        after,
        kind: rw.kind,
        forward,
        backward,
    }
}

/// Lifts a rewrite of X into And(left, X).
fn lift_right(rw: Rewrite, left: &Formula) -> Rewrite {
    let before = Formula::and(left.clone(), rw.before.clone());
    let after = Formula::and(left.clone(), rw.after.clone());
    let forward = r1_node(
        leaf(StepKind::Ax2L, before.clone(), left.clone()),
        compose(
            leaf(StepKind::Ax2R, before.clone(), rw.before.clone()),
            rw.forward,
        ),
    );
    let backward = r1_node(
        leaf(StepKind::Ax2L, after.clone(), left.clone()),
        compose(
            leaf(StepKind::Ax2R, after.clone(), rw.after.clone()),
            rw.backward,
        ),
    );
    Rewrite {
        before,
        after,
        kind: rw.kind,
        forward,
        backward,
    }
}

/// Lifts a rewrite of X into ⟨base^exponent⟩X via R3.
fn lift_diamond(rw: Rewrite, base: u32, exponent: &Ordinal) -> Rewrite {
    Rewrite {
        before: Formula::diamond(base, exponent.clone(), rw.before.clone()),
        after: Formula::diamond(base, exponent.clone(), rw.after.clone()),
        kind: rw.kind,
        forward: r3_node(base, exponent, rw.forward),
        backward: r3_node(base, exponent, rw.backward),
    }
}

/// Lifts a rewrite under a chain of left conjuncts (outermost first).
fn lift_under_prefix(mut rw: Rewrite, prefix: &[Formula]) -> Rewrite {
    for left in prefix.iter().rev() {
        rw = lift_right(rw, left);
    }
    rw
}

/// The right-nested conjunction of a monomial slice (⊤ when empty).
fn conjunction_of(monomials: &[Monomial]) -> Formula {
    let mut it = monomials.iter().rev();
    let Some(last) = it.next() else {
        return Formula::Top;
    };
    it.fold(last.to_formula(), |acc, m| {
        Formula::and(m.to_formula(), acc)
    })
}

/// ψ ⊢ (its i-th monomial), by an Ax2 projection spine.
fn projection_derivation(psi: &Mnf, i: usize) -> Derivation {
    debug_assert!(i < psi.len());
    let f = psi.to_formula();
    if psi.len() == 1 {
        return identity(f);
    }
    if i == 0 {
        return leaf(StepKind::Ax2L, f, psi.monomials()[0].to_formula());
    }
    let tail = psi.tail();
    compose(
        leaf(StepKind::Ax2R, f, tail.to_formula()),
        projection_derivation(&tail, i - 1),
    )
}

/// ψ₀ ⊢ ψ₁ between normal forms, built from the decision procedure's
/// bounds: per succedent monomial, project the matching antecedent
/// monomial, collapse the base with Ax5, weaken the exponent with Ax3;
/// conjoin with R1. `None` when the sequent is not derivable.
fn mnf_entailment(psi0: &Mnf, psi1: &Mnf) -> Option<Derivation> {
    if !decide_mnf(psi0, psi1).derivable {
        return None;
    }
    if psi1.is_top() {
        return Some(leaf(StepKind::Ax1b, psi0.to_formula(), Formula::Top));
    }
    let chains: Vec<Derivation> = psi1
        .monomials()
        .iter()
        .map(|target| {
            let i = psi0
                .monomials()
                .iter()
                .position(|m| m.base() >= target.base())
                .expect("the decision procedure checked the base condition");
            let matched = &psi0.monomials()[i];
            let mut d = projection_derivation(psi0, i);
            let mut current = matched.clone();
            if matched.base() > target.base() {
                let image = mono(
                    target.base(),
                    hyper_exp(matched.base() - target.base(), matched.exponent()),
                );
                d = compose(
                    d,
                    leaf(StepKind::Ax5, current.to_formula(), image.to_formula()),
                );
                current = image;
            }
            if current != *target {
                d = compose(
                    d,
                    leaf(StepKind::Ax3, current.to_formula(), target.to_formula()),
                );
            }
            d
        })
        .collect();
    let mut it = chains.into_iter().rev();
    let mut acc = it.next().expect("psi1 is nonempty");
    for chain in it {
        acc = r1_node(chain, acc);
    }
    Some(acc)
}

/// And(a, b) as formulas ⊢ merge(a, b) as a formula: replays the
/// largest-base-first insertion fold, projecting each monomial out of the
/// conjunction and discharging each insertion with a ConNF/MonoMax leaf.
fn merge_forward(a: &Mnf, b: &Mnf, merged: &Mnf) -> Derivation {
    let root = Formula::and(a.to_formula(), b.to_formula());
    let mut items: Vec<(Monomial, Derivation)> = Vec::with_capacity(a.len() + b.len());
    for (side, side_formula, is_right) in [(a, a.to_formula(), false), (b, b.to_formula(), true)] {
        for (i, m) in side.monomials().iter().enumerate() {
            let pick = if is_right {
                StepKind::Ax2R
            } else {
                StepKind::Ax2L
            };
            let projection = compose(
                leaf(pick, root.clone(), side_formula.clone()),
                projection_derivation(side, i),
            );
            items.push((m.clone(), projection));
        }
    }
    // The same stable largest-base-first order merge_mnf folds in.
    items.sort_by(|x, y| y.0.base().cmp(&x.0.base()));
    let mut it = items.into_iter();
    let (first, mut derivation) = it.next().expect("merge of nonempty normal forms");
    let mut acc = Mnf::new(vec![first]).expect("a single monomial is a valid MNF");
    for (m, projection) in it {
        let result = insert_monomial(&m, &acc).expect("descending fold keeps bases at the head");
        if result == acc {
            continue;
        }
        let before = Formula::and(m.to_formula(), acc.to_formula());
        let after = result.to_formula();
        let conjoined = r1_node(projection, derivation);
        derivation = if before == after {
            conjoined
        } else {
            let kind = StepKind::ConNf;
            compose(conjoined, leaf(kind, before, after))
        };
        acc = result;
    }
    debug_assert_eq!(&acc, merged);
    derivation
}

/// The rewrite chain for ⟨n^α⟩ψ (ψ a normal form, α > 0): PS1 peels for
/// bases below n, one terminal step at the first base ≥ n (co-additivity,
/// PS2, or the Schmerl axiom), then insertion folds for the PS1
/// by-products. Mirrors [`push_modality`] exactly.
fn push_rewrites(n: u32, alpha: &Ordinal, psi: &Mnf) -> (Mnf, Vec<Rewrite>) {
    debug_assert!(!alpha.is_zero());
    let ms = psi.monomials();
    let split = ms.iter().position(|m| m.base() >= n).unwrap_or(ms.len());
    let mut rewrites = Vec::new();
    let mut prefix: Vec<Formula> = Vec::with_capacity(split);
    let mut byproducts: Vec<Monomial> = Vec::with_capacity(split);
    for (i, m) in ms[..split].iter().enumerate() {
        let by = mono(m.base(), m.exponent() + &hyper_exp(n - m.base(), alpha));
        let rest = conjunction_of(&ms[i + 1..]);
        let before = Formula::diamond(n, alpha.clone(), conjunction_of(&ms[i..]));
        let after = Formula::and(
            by.to_formula(),
            Formula::diamond(n, alpha.clone(), rest),
        );
        rewrites.push(lift_under_prefix(
            derived_rewrite(StepKind::Ps1, before, after),
            &prefix,
        ));
        prefix.push(by.to_formula());
        byproducts.push(by);
    }
    let terminal: Vec<Monomial> = match ms.get(split) {
        None => vec![mono(n, alpha.clone())],
        Some(m) if m.base() == n => match ms.get(split + 1) {
            None => {
                // Co-additivity: ⟨n^α⟩⟨n^{α₀}⟩⊤ ⊢ ⟨n^{α₀+α}⟩⊤.
                let combined = mono(n, m.exponent() + alpha);
                let before = Formula::diamond(n, alpha.clone(), m.to_formula());
                let after = combined.to_formula();
                rewrites.push(lift_under_prefix(
                    Rewrite {
                        forward: leaf(StepKind::Ax4R, before.clone(), after.clone()),
                        backward: leaf(StepKind::Ax4L, after.clone(), before.clone()),
                        before,
                        after,
                        kind: StepKind::Ax4R,
                    },
                    &prefix,
                ));
                vec![combined]
            }
            Some(next) => {
                let theta = hyper_exp(next.base() - n, next.exponent());
                let new_head = mono(n, m.exponent() + &(&theta * alpha));
                let mut terminal = vec![new_head];
                terminal.extend(ms[split + 1..].iter().cloned());
                let before = Formula::diamond(n, alpha.clone(), conjunction_of(&ms[split..]));
                let after = conjunction_of(&terminal);
                rewrites.push(lift_under_prefix(
                    derived_rewrite(StepKind::Ps2, before, after),
                    &prefix,
                ));
                terminal
            }
        },
        Some(m) => {
            let mu = hyper_exp(m.base() - n, m.exponent());
            let new_head = mono(n, &mu * &(&Ordinal::one() + alpha));
            let mut terminal = vec![new_head];
            terminal.extend(ms[split..].iter().cloned());
            let before = Formula::diamond(n, alpha.clone(), conjunction_of(&ms[split..]));
            let after = conjunction_of(&terminal);
            rewrites.push(lift_under_prefix(
                Rewrite {
                    forward: leaf(StepKind::Ax6L, before.clone(), after.clone()),
                    backward: leaf(StepKind::Ax6R, after.clone(), before.clone()),
                    before,
                    after,
                    kind: StepKind::Ax6L,
                },
                &prefix,
            ));
            terminal
        }
    };
    let mut acc = Mnf::new(terminal).expect("the terminal block satisfies the MNF invariants");
    for (i, by) in byproducts.iter().enumerate().rev() {
        let result = insert_monomial(by, &acc).expect("by-product bases stay below the head");
        let before = Formula::and(by.to_formula(), acc.to_formula());
        let after = result.to_formula();
        if before != after {
            let kind = if result == acc {
                StepKind::MonoMax
            } else {
                StepKind::ConNf
            };
            rewrites.push(lift_under_prefix(
                derived_rewrite(kind, before, after),
                &prefix[..i],
            ));
        }
        acc = result;
    }
    debug_assert_eq!(
        acc,
        push_modality(n, alpha, psi).expect("alpha is positive"),
    );
    (acc, rewrites)
}

/// Normalizes a zero-elided formula while recording every rewrite as a
/// chained whole-formula step with derivations in both directions.
fn normalize_rewrites(f: &Formula) -> (Mnf, Vec<Rewrite>) {
    match f {
        Formula::Top => (Mnf::top(), Vec::new()),
        Formula::And(l, r) => {
            let (a, steps_l) = normalize_rewrites(l);
            let (b, steps_r) = normalize_rewrites(r);
            let mut steps: Vec<Rewrite> = steps_l
                .into_iter()
                .map(|rw| lift_left(rw, r))
                .collect();
            let a_formula = a.to_formula();
            steps.extend(steps_r.into_iter().map(|rw| lift_right(rw, &a_formula)));
            let b_formula = b.to_formula();
            let state = Formula::and(a_formula.clone(), b_formula.clone());
            if a.is_top() {
                steps.push(Rewrite {
                    forward: leaf(StepKind::Ax2R, state.clone(), b_formula.clone()),
                    backward: r1_node(
                        leaf(StepKind::Ax1b, b_formula.clone(), Formula::Top),
                        identity(b_formula.clone()),
                    ),
                    before: state,
                    after: b_formula,
                    kind: StepKind::Ax2R,
                });
                (b, steps)
            } else if b.is_top() {
                steps.push(Rewrite {
                    forward: leaf(StepKind::Ax2L, state.clone(), a_formula.clone()),
                    backward: r1_node(
                        identity(a_formula.clone()),
                        leaf(StepKind::Ax1b, a_formula.clone(), Formula::Top),
                    ),
                    before: state,
                    after: a_formula,
                    kind: StepKind::Ax2L,
                });
                (a, steps)
            } else {
                let merged = merge_mnf(&a, &b);
                let merged_formula = merged.to_formula();
                if merged_formula != state {
                    steps.push(Rewrite {
                        forward: merge_forward(&a, &b, &merged),
                        backward: r1_node(
                            mnf_entailment(&merged, &a)
                                .expect("a merge entails its left operand"),
                            mnf_entailment(&merged, &b)
                                .expect("a merge entails its right operand"),
                        ),
                        before: state,
                        after: merged_formula,
                        kind: StepKind::R1,
                    });
                }
                (merged, steps)
            }
        }
        Formula::Diamond(n, alpha, body) => {
            debug_assert!(!alpha.is_zero(), "zero exponents are elided at entry");
            let (inner, steps_body) = normalize_rewrites(body);
            let mut steps: Vec<Rewrite> = steps_body
                .into_iter()
                .map(|rw| lift_diamond(rw, *n, alpha))
                .collect();
            let (pushed, push_steps) = push_rewrites(*n, alpha, &inner);
            steps.extend(push_steps);
            (pushed, steps)
        }
    }
}

/// Normalizes a formula and reports every rewrite performed, as a chain
/// of whole-formula steps. The chain starts from the zero-elided input
/// (the ⟨n⁰⟩φ = φ convention is definitional, not a step) and ends at
/// the normal form's formula embedding. Conjunction merges appear as one
/// R1-tagged restructuring step each.
pub fn normalize_traced(f: &Formula) -> (Mnf, Trace) {
    let elided = f.elide_zero_exponents();
    let (mnf, rewrites) = normalize_rewrites(&elided);
    let steps = rewrites
        .into_iter()
        .map(|rw| TraceStep {
            before: rw.before,
            after: rw.after,
            kind: rw.kind,
        })
        .collect();
    (mnf, Trace { steps })
}

/// Composes the forward halves of a rewrite chain into start ⊢ end.
fn forward_chain(start: Formula, rewrites: &[Rewrite]) -> Derivation {
    rewrites
        .iter()
        .fold(identity(start), |acc, rw| compose(acc, rw.forward.clone()))
}

/// Composes the backward halves into end ⊢ start.
fn backward_chain(end: Formula, rewrites: &[Rewrite]) -> Derivation {
    rewrites
        .iter()
        .rev()
        .fold(identity(end), |acc, rw| compose(acc, rw.backward.clone()))
}

/// Produces a checkable derivation of φ ⊢ ψ, or refutes it with the
/// decision procedure's verdict. The witness is the normalization chain
/// of φ, the monomial-wise entailment between the two normal forms, and
/// the reversed normalization chain of ψ, composed with cuts. Zero
/// exponents are elided first, so the conclusion is stated over the
/// elided formulas.
pub fn derive_witness(phi: &Formula, psi: &Formula) -> Result<Derivation, NotDerivable> {
    let phi = phi.elide_zero_exponents();
    let psi = psi.elide_zero_exponents();
    if phi == psi {
        return Ok(identity(phi));
    }
    let (a, steps_a) = normalize_rewrites(&phi);
    let (b, steps_b) = normalize_rewrites(&psi);
    let verdict = decide_mnf(&a, &b);
    if !verdict.derivable {
        return Err(NotDerivable { verdict });
    }
    let forward = forward_chain(phi, &steps_a);
    let bridge = mnf_entailment(&a, &b).expect("the decision procedure accepted the sequent");
    let backward = backward_chain(psi.clone(), &steps_b);
    // backward proves ψ's normal form ⊢ ψ.
    let backward = Derivation {
        conclusion: Sequent::new(b.to_formula(), psi),
        ..backward
    };
    Ok(compose(compose(forward, bridge), backward))
}

// ---------------------------------------------------------------------
// Bounded saturation.

/// Default cardinality bound for [`saturate`].
pub const DEFAULT_SEQUENT_LIMIT: usize = 5_000_000;

/// The desk-scale cap profile: bases ≤ 2, exponents ≤ ω·2, formula size
/// ≤ 4, depth 4.
pub fn desk_caps() -> (u32, Ordinal, usize, usize) {
    (2, "w*2".parse().expect("valid ordinal literal"), 4, 4)
}

/// The fixed exponent menu formulas draw from, filtered by the cap: one
/// representative per small shape (successors, a limit, a successor of a
/// limit, a sum, a square, a tower). Bigger caps extend the menu, so
/// saturation is monotone in the cap.
fn exponent_menu(cap: &Ordinal) -> Vec<Ordinal> {
    ["1", "2", "w", "w+1", "w*2", "w^2", "w^w"]
        .iter()
        .map(|s| s.parse().expect("valid ordinal literal"))
        .filter(|e| e <= cap)
        .collect()
}

/// Every formula with bases ≤ `bases_max`, exponents from `menu`, and
/// size ≤ `size_cap`, grouped nowhere — just the flat universe.
fn enumerate_universe(bases_max: u32, menu: &[Ordinal], size_cap: usize) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new(); size_cap + 1];
    if size_cap >= 1 {
        by_size[1].push(Formula::Top);
    }
    for size in 2..=size_cap {
        let mut formulas = Vec::new();
        for base in 0..=bases_max {
            for exponent in menu {
                for body in &by_size[size - 1] {
                    formulas.push(Formula::diamond(base, exponent.clone(), body.clone()));
                }
            }
        }
        for left_size in 1..size.saturating_sub(1) {
            let right_size = size - 1 - left_size;
            for left in &by_size[left_size] {
                for right in &by_size[right_size] {
                    formulas.push(Formula::and(left.clone(), right.clone()));
                }
            }
        }
        by_size[size] = formulas;
    }
    by_size.into_iter().flatten().collect()
}

fn within_caps(f: &Formula, bases_max: u32, exponent_cap: &Ordinal, size_cap: usize) -> bool {
    fn shape_ok(f: &Formula, bases_max: u32, exponent_cap: &Ordinal) -> bool {
        match f {
            Formula::Top => true,
            Formula::And(l, r) => {
                shape_ok(l, bases_max, exponent_cap) && shape_ok(r, bases_max, exponent_cap)
            }
            Formula::Diamond(n, alpha, body) => {
                *n <= bases_max && alpha <= exponent_cap && shape_ok(body, bases_max, exponent_cap)
            }
        }
    }
    f.size() <= size_cap && shape_ok(f, bases_max, exponent_cap)
}

/// All axiom instances over the universe whose formulas stay within the
/// caps (Ax4/Ax5/Ax6 may mint exponents outside the menu; the cap still
/// bounds them).
fn axiom_seeds(
    universe: &[Formula],
    menu: &[Ordinal],
    bases_max: u32,
    exponent_cap: &Ordinal,
    size_cap: usize,
    closed: &mut BTreeSet<Sequent>,
) {
    for f in universe {
        closed.insert(Sequent::new(f.clone(), f.clone()));
        closed.insert(Sequent::new(f.clone(), Formula::Top));
        if let Formula::And(l, r) = f {
            closed.insert(Sequent::new(f.clone(), (**l).clone()));
            closed.insert(Sequent::new(f.clone(), (**r).clone()));
        }
        if let Formula::Diamond(n, alpha, body) = f {
            for beta in menu {
                if beta < alpha {
                    closed.insert(Sequent::new(
                        f.clone(),
                        Formula::diamond(*n, beta.clone(), (**body).clone()),
                    ));
                }
            }
            if let Formula::Diamond(n2, inner, innermost) = &**body {
                if n2 == n {
                    let combined = inner + alpha;
                    if combined <= *exponent_cap {
                        let collapsed =
                            Formula::diamond(*n, combined, (**innermost).clone());
                        closed.insert(Sequent::new(collapsed.clone(), f.clone()));
                        closed.insert(Sequent::new(f.clone(), collapsed));
                    }
                }
            }
            for m in 0..*n {
                let delta = hyper_exp(n - m, alpha);
                if delta <= *exponent_cap {
                    closed.insert(Sequent::new(
                        f.clone(),
                        Formula::diamond(m, delta, (**body).clone()),
                    ));
                }
            }
            if let Some(image) = ax6_image(f) {
                if within_caps(&image, bases_max, exponent_cap, size_cap) {
                    closed.insert(Sequent::new(f.clone(), image.clone()));
                    closed.insert(Sequent::new(image, f.clone()));
                }
            }
        }
    }
}

/// A cost layer: the sequents first derivable with exactly that many
/// rule applications, with a join index from antecedent formulas to item
/// positions.
struct Layer {
    items: Vec<Arc<Sequent>>,
    by_antecedent: HashMap<Formula, Vec<u32>>,
}

impl Layer {
    fn new(items: Vec<Arc<Sequent>>) -> Layer {
        let mut by_antecedent: HashMap<Formula, Vec<u32>> = HashMap::new();
        for (i, s) in items.iter().enumerate() {
            by_antecedent
                .entry(s.antecedent.clone())
                .or_default()
                .push(i as u32);
        }
        Layer {
            items,
            by_antecedent,
        }
    }
}

struct Caps<'a> {
    menu: &'a [Ordinal],
    successors: &'a [Ordinal],
    bases_max: u32,
    size_cap: usize,
}

/// R3 and R4 conclusions from one premise, filtered against the closed
/// set.
fn unary_products(
    caps: &Caps<'_>,
    closed: &BTreeSet<Arc<Sequent>>,
    s: &Sequent,
) -> Vec<Sequent> {
    let mut out = Vec::new();
    let mut push = |candidate: Sequent| {
        if !closed.contains(&candidate) {
            out.push(candidate);
        }
    };
    let phi = &s.antecedent;
    let psi = &s.succedent;
    // R3: wrap both sides in every in-cap modality.
    if phi.size() < caps.size_cap && psi.size() < caps.size_cap {
        for base in 0..=caps.bases_max {
            for exponent in caps.menu {
                push(Sequent::new(
                    Formula::diamond(base, exponent.clone(), phi.clone()),
                    Formula::diamond(base, exponent.clone(), psi.clone()),
                ));
            }
        }
    }
    // R4: both conclusion sides have size 3 + |φ| + |ψ|.
    if caps.bases_max >= 1 && 3 + phi.size() + psi.size() <= caps.size_cap {
        for n in 1..=caps.bases_max {
            for m in 0..n {
                for alpha in caps.menu {
                    for beta in caps.successors {
                        let pushed = Formula::diamond(m, beta.clone(), psi.clone());
                        push(Sequent::new(
                            Formula::and(
                                Formula::diamond(n, alpha.clone(), phi.clone()),
                                pushed.clone(),
                            ),
                            Formula::diamond(n, alpha.clone(), Formula::and(phi.clone(), pushed)),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// R1 and R2 conclusions with `s` as the left premise and the right
/// premise drawn from `right`, filtered against the closed set. Every
/// ordered premise pair is covered because the round enumerates every
/// ordered split of the cost budget.
fn binary_products(
    caps: &Caps<'_>,
    closed: &BTreeSet<Arc<Sequent>>,
    s: &Sequent,
    right: &Layer,
) -> Vec<Sequent> {
    let mut out = Vec::new();
    let mut push = |candidate: Sequent| {
        if !closed.contains(&candidate) {
            out.push(candidate);
        }
    };
    let phi = &s.antecedent;
    let psi = &s.succedent;
    // R2: cut s with everything it feeds.
    if let Some(group) = right.by_antecedent.get(psi) {
        for &i in group {
            let t = &right.items[i as usize];
            push(Sequent::new(phi.clone(), t.succedent.clone()));
        }
    }
    // R1: conjoin with anything sharing the antecedent.
    if let Some(group) = right.by_antecedent.get(phi) {
        for &i in group {
            let chi = &right.items[i as usize].succedent;
            if 1 + psi.size() + chi.size() <= caps.size_cap {
                push(Sequent::new(
                    phi.clone(),
                    Formula::and(psi.clone(), chi.clone()),
                ));
            }
        }
    }
    out
}

/// Expands one chunk of premises, optionally in parallel. The output
/// order equals the input order in every mode.
fn expand_chunk<F>(mode: Parallelism, chunk: &[Arc<Sequent>], produce: F) -> Vec<Sequent>
where
    F: Fn(&Sequent) -> Vec<Sequent> + Sync,
{
    match mode {
        Parallelism::Sequential => chunk.iter().flat_map(|s| produce(s.as_ref())).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => chunk
            .par_iter()
            .map(|s| produce(s.as_ref()))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect(),
    }
}

/// Folds freshly generated conclusions into the closed set, keeping the
/// genuinely new ones, and enforces the cardinality bound.
fn absorb(
    candidates: Vec<Sequent>,
    closed: &mut BTreeSet<Arc<Sequent>>,
    new_items: &mut Vec<Arc<Sequent>>,
    sequent_limit: usize,
) -> Result<(), SaturationError> {
    for candidate in candidates {
        if !closed.contains(&candidate) {
            let shared = Arc::new(candidate);
            closed.insert(shared.clone());
            new_items.push(shared);
        }
    }
    if closed.len() > sequent_limit {
        return Err(SaturationError::ResourceLimit {
            limit: sequent_limit,
        });
    }
    Ok(())
}

/// Forward-chains the calculus over a finite universe: every axiom
/// instance with bases ≤ `bases_max`, exponents ≤ `exponent_cap` (drawn
/// from a fixed menu, plus Ax4/Ax5/Ax6 images within the cap), and
/// formula size ≤ `size_cap`, closed under sequents derivable in at most
/// `depth` rule applications (costs add across premises: a cut of a
/// cost-i and a cost-j proof costs i+j+1). Monotone in every cap;
/// deterministic.
pub fn saturate(
    bases_max: u32,
    exponent_cap: &Ordinal,
    size_cap: usize,
    depth: usize,
) -> Result<BTreeSet<Sequent>, SaturationError> {
    #[cfg(feature = "parallel")]
    let mode = Parallelism::Rayon;
    #[cfg(not(feature = "parallel"))]
    let mode = Parallelism::Sequential;
    saturate_with(
        bases_max,
        exponent_cap,
        size_cap,
        depth,
        mode,
        DEFAULT_SEQUENT_LIMIT,
    )
}

/// [`saturate`] with an explicit schedule and cardinality bound.
pub fn saturate_with(
    bases_max: u32,
    exponent_cap: &Ordinal,
    size_cap: usize,
    depth: usize,
    mode: Parallelism,
    sequent_limit: usize,
) -> Result<BTreeSet<Sequent>, SaturationError> {
    // Premises are expanded in bounded chunks so the pending candidate
    // buffer and the cardinality check stay bounded.
    const CHUNK: usize = 256;
    let menu = exponent_menu(exponent_cap);
    let successors: Vec<Ordinal> = menu.iter().filter(|e| e.is_successor()).cloned().collect();
    let caps = Caps {
        menu: &menu,
        successors: &successors,
        bases_max,
        size_cap,
    };
    let universe = enumerate_universe(bases_max, &menu, size_cap);
    let mut seeds = BTreeSet::new();
    axiom_seeds(
        &universe,
        &menu,
        bases_max,
        exponent_cap,
        size_cap,
        &mut seeds,
    );
    let mut closed: BTreeSet<Arc<Sequent>> = seeds.into_iter().map(Arc::new).collect();
    if closed.len() > sequent_limit {
        return Err(SaturationError::ResourceLimit {
            limit: sequent_limit,
        });
    }
    // layers[c] holds the sequents whose cheapest derivation uses exactly
    // c rule applications; round k adds layer k.
    let mut layers: Vec<Layer> = vec![Layer::new(closed.iter().cloned().collect())];
    for k in 1..=depth {
        let mut new_items: Vec<Arc<Sequent>> = Vec::new();
        for chunk in layers[k - 1].items.chunks(CHUNK) {
            let candidates = expand_chunk(mode, chunk, |s| unary_products(&caps, &closed, s));
            absorb(candidates, &mut closed, &mut new_items, sequent_limit)?;
        }
        for i in 0..k {
            let j = k - 1 - i;
            let (left, right) = (&layers[i], &layers[j]);
            if left.items.is_empty() || right.items.is_empty() {
                continue;
            }
            for chunk in left.items.chunks(CHUNK) {
                let candidates =
                    expand_chunk(mode, chunk, |s| binary_products(&caps, &closed, s, right));
                absorb(candidates, &mut closed, &mut new_items, sequent_limit)?;
            }
        }
        layers.push(Layer::new(new_items));
    }
    // Dropping the layers releases every other strong reference, so the
    // final set is assembled by moves, not copies.
    drop(layers);
    Ok(closed
        .into_iter()
        .map(|arc| Arc::try_unwrap(arc).unwrap_or_else(|shared| (*shared).clone()))
        .collect())
}

// ---------------------------------------------------------------------
// Serialization.

enum ParamValue {
    Base(u32),
    Exponent(Ordinal),
}

impl serde::Serialize for ParamValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ParamValue::Base(n) => serializer.serialize_u32(*n),
            ParamValue::Exponent(o) => serializer.collect_str(o),
        }
    }
}

/// Best-effort recovery of a step's schema parameters from its
/// conclusion, for serialization. Unrecoverable or parameterless steps
/// yield an empty map.
fn parameters(kind: StepKind, conclusion: &Sequent) -> Vec<(&'static str, ParamValue)> {
    use ParamValue::{Base, Exponent};
    let ant = conclusion.antecedent.elide_zero_exponents();
    let suc = conclusion.succedent.elide_zero_exponents();
    match kind {
        StepKind::Ax3 => match (&ant, &suc) {
            (Formula::Diamond(n, a, _), Formula::Diamond(_, b, _)) => vec![
                ("base", Base(*n)),
                ("antecedent_exponent", Exponent(a.clone())),
                ("succedent_exponent", Exponent(b.clone())),
            ],
            _ => Vec::new(),
        },
        StepKind::Ax4L => match &suc {
            Formula::Diamond(n, outer, body) => match &**body {
                Formula::Diamond(_, inner, _) => vec![
                    ("base", Base(*n)),
                    ("inner_exponent", Exponent(inner.clone())),
                    ("outer_exponent", Exponent(outer.clone())),
                ],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        StepKind::Ax4R => match &ant {
            Formula::Diamond(n, outer, body) => match &**body {
                Formula::Diamond(_, inner, _) => vec![
                    ("base", Base(*n)),
                    ("inner_exponent", Exponent(inner.clone())),
                    ("outer_exponent", Exponent(outer.clone())),
                ],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        StepKind::Ax5 => match (&ant, &suc) {
            (Formula::Diamond(n, a, _), Formula::Diamond(m, _, _)) => vec![
                ("antecedent_base", Base(*n)),
                ("succedent_base", Base(*m)),
                ("exponent", Exponent(a.clone())),
            ],
            _ => Vec::new(),
        },
        StepKind::Ax6L | StepKind::Ax6R => {
            let redex = if kind == StepKind::Ax6L { &ant } else { &suc };
            match redex {
                Formula::Diamond(n, a, _) => {
                    vec![("base", Base(*n)), ("exponent", Exponent(a.clone()))]
                }
                _ => Vec::new(),
            }
        }
        StepKind::R3 => match &ant {
            Formula::Diamond(n, a, _) => {
                vec![("base", Base(*n)), ("exponent", Exponent(a.clone()))]
            }
            _ => Vec::new(),
        },
        StepKind::R4 => match &ant {
            Formula::And(l, r) => match (&**l, &**r) {
                (Formula::Diamond(n, a, _), Formula::Diamond(m, b, _)) => vec![
                    ("outer_base", Base(*n)),
                    ("outer_exponent", Exponent(a.clone())),
                    ("inner_base", Base(*m)),
                    ("inner_exponent", Exponent(b.clone())),
                ],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        },
        StepKind::Ps1 | StepKind::Ps2 | StepKind::EqualBase => {
            let image = |f: &Formula| match kind {
                StepKind::Ps1 => ps1_image(f),
                StepKind::Ps2 => ps2_image(f),
                _ => equal_base_image(f),
            };
            for (x, y) in [(&ant, &suc), (&suc, &ant)] {
                if image(x).is_some_and(|img| img == *y) {
                    if let Formula::Diamond(n, a, _) = x {
                        return vec![("base", Base(*n)), ("exponent", Exponent(a.clone()))];
                    }
                }
            }
            Vec::new()
        }
        StepKind::ConNf | StepKind::MonoMax => {
            for (x, y) in [(&ant, &suc), (&suc, &ant)] {
                if insert_instance(kind, x, y) {
                    if let Some((m, _)) = split_monomial_head(x) {
                        return vec![
                            ("base", Base(m.base())),
                            ("exponent", Exponent(m.exponent().clone())),
                        ];
                    }
                }
            }
            Vec::new()
        }
        _ => Vec::new(),
    }
}

impl serde::Serialize for Derivation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let params = parameters(self.kind, &self.conclusion);
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("rule", self.kind.name())?;
        map.serialize_entry("parameters", &ParameterMap(&params))?;
        map.serialize_entry("conclusion", &self.conclusion)?;
        map.serialize_entry("premises", &self.premises)?;
        map.end()
    }
}

struct ParameterMap<'a>(&'a [(&'static str, ParamValue)]);

impl serde::Serialize for ParameterMap<'_> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (key, value) in self.0 {
            map.serialize_entry(key, value)?;
        }
        map.end()
    }
}
