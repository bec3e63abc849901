//! Ordinals below ε₀ in Cantor normal form.
//!
//! Every ordinal α < ε₀ has a unique Cantor normal form
//! α = ω^{γ₁}·c₁ + … + ω^{γ_k}·c_k with γ₁ > … > γ_k and coefficients
//! c_i ≥ 1, where the exponents γ_i are again ordinals below ε₀.
//! [`Ordinal`] stores exactly this: a list of `(exponent, coefficient)`
//! pairs in strictly descending exponent order. The representation is
//! canonical, so structural equality coincides with ordinal equality, and
//! the ordinal order is realized by the lexicographic order on term lists
//! (a proper prefix is strictly smaller).
//!
//! Besides comparison and the non-commutative `+` and `·`, the module
//! provides the two partial inverses that normal-form conversion is built
//! on — left subtraction (the unique ξ with β + ξ = α) and left division
//! by an ω-power — together with ω-powers and the hyper-exponentials
//! `e^n`, the n-fold iterates of e¹ : α ↦ −1+ω^α.
//!
//! The module also owns the shared ordinal text grammar:
//!
//! ```text
//! ord  := term ('+' term)*
//! term := 'w' ('^' atom)? ('*' nat)? | nat | 'e' '^' nat '(' ord ')' | '(' ord ')'
//! atom := nat | 'w' | '(' ord ')'
//! nat  := [0-9]+
//! ```
//!
//! Whitespace is insignificant and coefficients must be nonzero. Parsing
//! evaluates eagerly (`"1+w"` parses to ω), so no expression tree survives;
//! [`Display`](fmt::Display) prints the canonical form back out, and
//! `format ∘ parse ∘ format = format`. An exponent is printed bare when it
//! is a natural number or exactly ω and parenthesized otherwise, which
//! keeps every printed form re-parseable. The `e^n(…)` and parenthesized
//! term forms are input-only conveniences and are never printed.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;
use thiserror::Error;

/// Maximum nesting depth accepted by the parsers (parenthesized exponents,
/// modality bodies). A depth limit keeps adversarially nested input from
/// exhausting the stack; no meaningful formula comes anywhere near it.
pub(crate) const MAX_NESTING: usize = 512;

/// Maximum height accepted for the `e^n(…)` input form and for modality
/// bases at the parser level. `e^n` builds an ω-tower of height n, so an
/// unchecked height would let a ten-character input allocate (and later
/// print) an astronomically deep term tree.
pub(crate) const MAX_PARSED_HEIGHT: u32 = 4096;

/// An ordinal below ε₀ in Cantor normal form.
///
/// The term list is strictly descending in the exponent and every
/// coefficient is at least 1; the empty list denotes 0. These invariants
/// are maintained by construction — all arithmetic returns canonical
/// forms — so `==` is ordinal equality and [`Ord`] is the ordinal order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ordinal {
    /// `(exponent, coefficient)` pairs of the Cantor normal form.
    terms: Vec<(Ordinal, BigUint)>,
}

/// Errors from the partial arithmetic operations.
#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticError {
    /// Left subtraction `α − β` was asked for with β > α.
    #[error("left subtraction underflow: subtrahend exceeds minuend")]
    Underflow,
    /// Left division found a CNF exponent below the divisor's, so no exact
    /// quotient exists.
    #[error("ordinal is not left-divisible by the given omega power")]
    NotDivisible,
    /// Left division requires an ω-power divisor (a single CNF term with
    /// coefficient 1).
    #[error("left division requires a positive omega-power divisor")]
    InvalidDivisor,
}

/// A parse error, with the byte offset at which it was detected.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("syntax error at byte {pos}: {message}")]
pub struct SyntaxError {
    pub pos: usize,
    pub message: String,
}

impl Ordinal {
    /// The ordinal 0 (the empty normal form).
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    /// The ordinal 1 = ω⁰.
    pub fn one() -> Self {
        Ordinal::natural(1u32)
    }

    /// The ordinal ω.
    pub fn omega() -> Self {
        Ordinal::omega_power(Ordinal::one())
    }

    /// The finite ordinal `n`.
    pub fn natural(n: impl Into<BigUint>) -> Self {
        let n = n.into();
        if n.is_zero() {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![(Ordinal::zero(), n)],
            }
        }
    }

    /// ω^`exponent`: a single CNF term with coefficient 1.
    pub fn omega_power(exponent: Ordinal) -> Self {
        Ordinal {
            terms: vec![(exponent, BigUint::one())],
        }
    }

    /// Builds an ordinal from raw CNF terms. The caller must supply
    /// strictly descending exponents and nonzero coefficients.
    pub(crate) fn from_terms(terms: Vec<(Ordinal, BigUint)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero()));
        Ordinal { terms }
    }

    /// The CNF terms as `(exponent, coefficient)` pairs, descending.
    pub fn terms(&self) -> &[(Ordinal, BigUint)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for 0, 1, 2, … — normal forms whose only term is ω⁰·c.
    pub fn is_natural(&self) -> bool {
        match self.terms.as_slice() {
            [] => true,
            [(e, _)] => e.is_zero(),
            _ => false,
        }
    }

    fn is_one(&self) -> bool {
        matches!(self.terms.as_slice(), [(e, c)] if e.is_zero() && c.is_one())
    }

    /// True iff the ordinal is a successor, i.e. has the form β + 1
    /// (equivalently: its normal form ends in a finite part).
    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|(e, _)| e.is_zero())
    }

    /// For a successor β + 1 returns β; `None` for 0 and limits.
    pub fn predecessor(&self) -> Option<Ordinal> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().expect("successor is nonzero");
        last.1 -= 1u32;
        if last.1.is_zero() {
            terms.pop();
        }
        Some(Ordinal { terms })
    }

    /// The exponent of the leading CNF term; `None` for 0.
    pub fn leading_exponent(&self) -> Option<&Ordinal> {
        self.terms.first().map(|(e, _)| e)
    }

    /// If the ordinal is an ω-power ω^δ (one CNF term, coefficient 1),
    /// returns δ. Note that 1 = ω⁰ counts.
    pub fn omega_power_exponent(&self) -> Option<&Ordinal> {
        match self.terms.as_slice() {
            [(e, c)] if c.is_one() => Some(e),
            _ => None,
        }
    }

    /// Left subtraction: the unique ξ with `prefix` + ξ = `self`.
    ///
    /// Errors with [`ArithmeticError::Underflow`] when `prefix` > `self`.
    /// In particular `one().left_subtract` realizes the paper's −1+α
    /// operator: −1+ω = ω by limit absorption.
    pub fn left_subtract(&self, prefix: &Ordinal) -> Result<Ordinal, ArithmeticError> {
        fn sub(a: &[(Ordinal, BigUint)], b: &[(Ordinal, BigUint)]) -> Result<Ordinal, ArithmeticError> {
            let Some((be, bc)) = b.first() else {
                return Ok(Ordinal {
                    terms: a.to_vec(),
                });
            };
            let Some((ae, ac)) = a.first() else {
                return Err(ArithmeticError::Underflow);
            };
            match be.cmp(ae) {
                // The minuend's head absorbs the whole subtrahend.
                Ordering::Less => Ok(Ordinal { terms: a.to_vec() }),
                Ordering::Greater => Err(ArithmeticError::Underflow),
                Ordering::Equal => match bc.cmp(ac) {
                    Ordering::Greater => Err(ArithmeticError::Underflow),
                    Ordering::Less => {
                        let mut terms = vec![(ae.clone(), ac - bc)];
                        terms.extend(a[1..].iter().cloned());
                        Ok(Ordinal { terms })
                    }
                    // Identical heads cancel; recurse on the tails.
                    Ordering::Equal => sub(&a[1..], &b[1..]),
                },
            }
        }
        sub(&self.terms, &prefix.terms)
    }

    /// Left division by an ω-power: the unique ξ with `divisor`·ξ = `self`,
    /// when it exists.
    ///
    /// Because ω^δ·ξ distributes ω^δ into every CNF exponent of ξ, the
    /// quotient exists iff every CNF exponent of `self` is ≥ δ, and is
    /// computed by left-subtracting δ from each exponent.
    pub fn left_divide(&self, divisor: &Ordinal) -> Result<Ordinal, ArithmeticError> {
        let delta = divisor
            .omega_power_exponent()
            .ok_or(ArithmeticError::InvalidDivisor)?;
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                e.left_subtract(delta)
                    .map(|q| (q, c.clone()))
                    .map_err(|_| ArithmeticError::NotDivisible)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Ordinal { terms })
    }

    /// The additively indecomposable CNF terms of the ordinal, descending:
    /// each ω^γ is yielded once per coefficient unit, and their sum is the
    /// ordinal itself. The iterator is lazy because coefficients are
    /// unbounded.
    pub fn cnf_terms(&self) -> CnfTerms<'_> {
        CnfTerms {
            terms: self.terms.iter(),
            current: None,
        }
    }
}

/// Iterator over the unit CNF terms of an ordinal; see
/// [`Ordinal::cnf_terms`].
pub struct CnfTerms<'a> {
    terms: std::slice::Iter<'a, (Ordinal, BigUint)>,
    current: Option<(&'a Ordinal, BigUint)>,
}

impl Iterator for CnfTerms<'_> {
    type Item = Ordinal;

    fn next(&mut self) -> Option<Ordinal> {
        if self.current.as_ref().is_none_or(|(_, left)| left.is_zero()) {
            let (e, c) = self.terms.next()?;
            self.current = Some((e, c.clone()));
        }
        let (e, left) = self.current.as_mut().expect("just refilled");
        *left -= 1u32;
        Some(Ordinal::omega_power((*e).clone()))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        // On canonical forms the ordinal order is the lexicographic order
        // on term lists, comparing (exponent, coefficient) pairwise, with
        // a proper prefix smaller than any extension — which is exactly
        // how `Vec` and tuples compare.
        self.terms.cmp(&other.terms)
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Ordinal {
    type Output = Ordinal;

    /// Ordinal addition: terms of the left summand below the right's
    /// leading exponent are absorbed, equal leading exponents merge their
    /// coefficients. Associative but not commutative (1+ω = ω ≠ ω+1).
    fn add(self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.leading_exponent() else {
            return self.clone();
        };
        let mut terms: Vec<_> = self
            .terms
            .iter()
            .take_while(|(e, _)| e > lead)
            .cloned()
            .collect();
        let kept = terms.len();
        let mut rhs_terms = rhs.terms.clone();
        if let Some((e, c)) = self.terms.get(kept) {
            if e == lead {
                rhs_terms[0].1 += c;
            }
        }
        terms.extend(rhs_terms);
        Ordinal { terms }
    }
}

impl Add for Ordinal {
    type Output = Ordinal;

    fn add(self, rhs: Ordinal) -> Ordinal {
        &self + &rhs
    }
}

impl Mul for &Ordinal {
    type Output = Ordinal;

    /// Ordinal multiplication. With a = ω^{γ₀}·c₀ + ρ, the product a·b
    /// maps each CNF term of b: a·ω^δ·d = ω^{γ₀+δ}·d for δ > 0, while the
    /// finite part d of b contributes ω^{γ₀}·(c₀·d) + ρ. Left-distributes
    /// over +; not commutative (2·ω = ω ≠ ω·2).
    fn mul(self, rhs: &Ordinal) -> Ordinal {
        if self.is_zero() || rhs.is_zero() {
            return Ordinal::zero();
        }
        let (gamma0, c0) = &self.terms[0];
        let mut terms = Vec::with_capacity(rhs.terms.len() + self.terms.len() - 1);
        for (delta, d) in &rhs.terms {
            if delta.is_zero() {
                terms.push((gamma0.clone(), c0 * d));
                terms.extend(self.terms[1..].iter().cloned());
            } else {
                terms.push((gamma0 + delta, d.clone()));
            }
        }
        Ordinal { terms }
    }
}

impl Mul for Ordinal {
    type Output = Ordinal;

    fn mul(self, rhs: Ordinal) -> Ordinal {
        &self * &rhs
    }
}

/// The hyper-exponential e^n: the n-fold iterate of e¹, where e¹ maps
/// 0 ↦ 0 and α ↦ ω^α for α > 0 (i.e. α ↦ −1+ω^α). Satisfies
/// e^{n+m} = e^n ∘ e^m.
pub fn hyper_exp(n: u32, a: &Ordinal) -> Ordinal {
    let mut result = a.clone();
    for _ in 0..n {
        if result.is_zero() {
            break;
        }
        result = Ordinal::omega_power(result);
    }
    result
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (exp, coeff)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if exp.is_zero() {
                write!(f, "{coeff}")?;
                continue;
            }
            f.write_str("w")?;
            if !exp.is_one() {
                if exp.is_natural() || exp == &Ordinal::omega() {
                    write!(f, "^{exp}")?;
                } else {
                    write!(f, "^({exp})")?;
                }
            }
            if !coeff.is_one() {
                write!(f, "*{coeff}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordinal({self})")
    }
}

impl serde::Serialize for Ordinal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Ordinal {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, SyntaxError> {
        let mut parser = OrdinalParser {
            src: s.as_bytes(),
            pos: 0,
            depth: 0,
        };
        let ordinal = parser.parse_ord()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(ordinal)
    }
}

/// Parses an ordinal starting at byte `pos` of `src`, stopping at the first
/// input that cannot extend it; returns the ordinal and the new position.
/// This is how the formula parser reads modality exponents in place.
pub(crate) fn parse_prefix(src: &str, pos: usize) -> Result<(Ordinal, usize), SyntaxError> {
    let mut parser = OrdinalParser {
        src: src.as_bytes(),
        pos,
        depth: 0,
    };
    let ordinal = parser.parse_ord()?;
    Ok((ordinal, parser.pos))
}

struct OrdinalParser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl OrdinalParser<'_> {
    fn error(&self, message: &str) -> SyntaxError {
        SyntaxError {
            pos: self.pos,
            message: message.to_owned(),
        }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    /// Consumes `byte` if it is next (after whitespace); returns whether it was.
    fn eat(&mut self, byte: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, byte: u8, message: &str) -> Result<(), SyntaxError> {
        if self.eat(byte) {
            Ok(())
        } else {
            Err(self.error(message))
        }
    }

    fn parse_nat(&mut self) -> Result<BigUint, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a number"));
        }
        Ok(BigUint::parse_bytes(&self.src[start..self.pos], 10).expect("digits parse"))
    }

    fn parse_ord(&mut self) -> Result<Ordinal, SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error("ordinal expression nests too deeply"));
        }
        let mut total = self.parse_term()?;
        while self.eat(b'+') {
            let term = self.parse_term()?;
            total = &total + &term;
        }
        self.depth -= 1;
        Ok(total)
    }

    fn parse_term(&mut self) -> Result<Ordinal, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exponent = if self.eat(b'^') {
                    self.parse_atom()?
                } else {
                    Ordinal::one()
                };
                let coefficient = if self.eat(b'*') {
                    let c = self.parse_nat()?;
                    if c.is_zero() {
                        return Err(self.error("coefficient must be nonzero"));
                    }
                    c
                } else {
                    BigUint::one()
                };
                // A single ω^exponent·coefficient term is already canonical.
                Ok(Ordinal::from_terms(vec![(exponent, coefficient)]))
            }
            Some(b'e') => {
                self.pos += 1;
                self.expect(b'^', "expected '^' after 'e'")?;
                let height = self.parse_nat()?;
                let height = height
                    .to_u32()
                    .filter(|h| *h <= MAX_PARSED_HEIGHT)
                    .ok_or_else(|| self.error("hyper-exponential height is too large"))?;
                self.expect(b'(', "expected '(' after hyper-exponential height")?;
                let argument = self.parse_ord()?;
                self.expect(b')', "expected ')'")?;
                Ok(hyper_exp(height, &argument))
            }
            Some(b'(') => {
                self.pos += 1;
                let ordinal = self.parse_ord()?;
                self.expect(b')', "expected ')'")?;
                Ok(ordinal)
            }
            Some(b) if b.is_ascii_digit() => Ok(Ordinal::natural(self.parse_nat()?)),
            _ => Err(self.error("expected an ordinal term")),
        }
    }

    fn parse_atom(&mut self) -> Result<Ordinal, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                Ok(Ordinal::omega())
            }
            Some(b'(') => {
                self.pos += 1;
                let ordinal = self.parse_ord()?;
                self.expect(b')', "expected ')'")?;
                Ok(ordinal)
            }
            Some(b) if b.is_ascii_digit() => Ok(Ordinal::natural(self.parse_nat()?)),
            _ => Err(self.error("expected an exponent: a number, 'w', or '(...)'")),
        }
    }
}
