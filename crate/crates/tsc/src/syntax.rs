//! The strictly positive modal language F_ε₀.
//!
//! Formulas are built from ⊤ by binary conjunction and the ordinal
//! modalities `<n^α>`, where the base n is a natural number and the
//! exponent α an [`Ordinal`] below ε₀. There are no propositional
//! variables and no negation — the language is strictly positive, and a
//! sequent φ ⊢ ψ is just an ordered pair of formulas.
//!
//! A *worm* is a formula that is a pure chain of modalities applied to ⊤;
//! worms are the backbone of the increasing normal forms, so they get
//! their own type with the chain exposed as a sequence.
//!
//! The module owns the shared formula grammar:
//!
//! ```text
//! formula := unit (('/\' | '&') unit)*
//! unit    := 'T' | '<' nat '^' ord '>' unit | '(' formula ')'
//! ```
//!
//! Whitespace is insignificant; `&` is an input synonym for `/\`; a
//! modality binds tighter than conjunction, so `<0^1>T /\ T` is a
//! conjunction and `<0^1>(T /\ T)` puts the conjunction under the
//! modality. Conjunction chains parse right-nested and print flat, so
//! `parse ∘ format` is the identity on ASTs.
//!
//! Zero exponents are legal here: `<1^0>T` parses to a real AST node. The
//! calculus identifies ⟨n⁰⟩φ with φ, but that convention is applied by
//! normalization and the proof machinery (via
//! [`Formula::elide_zero_exponents`]), never by the parser.

use crate::ordinal::{self, Ordinal, MAX_NESTING, MAX_PARSED_HEIGHT};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use crate::ordinal::SyntaxError;

/// A strictly positive modal formula.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// The verum constant ⊤, written `T`.
    Top,
    /// Binary conjunction φ ∧ ψ, written `/\`.
    And(Box<Formula>, Box<Formula>),
    /// The ordinal modality ⟨n^α⟩φ, written `<n^a>`.
    Diamond(u32, Ordinal, Box<Formula>),
}

/// A worm: a chain ⟨n₀^{α₀}⟩…⟨n_k^{α_k}⟩⊤ of modalities applied to ⊤,
/// stored outermost-first. The empty worm is ⊤.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Worm {
    pub modalities: Vec<(u32, Ordinal)>,
}

/// A sequent φ ⊢ ψ, written `PHI |- PSI`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub antecedent: Formula,
    pub succedent: Formula,
}

impl Formula {
    /// Convenience constructor for ⟨base^exponent⟩body.
    pub fn diamond(base: u32, exponent: Ordinal, body: Formula) -> Formula {
        Formula::Diamond(base, exponent, Box::new(body))
    }

    /// Convenience constructor for left ∧ right.
    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::And(Box::new(left), Box::new(right))
    }

    /// The number of AST nodes. This is the size measure the saturation
    /// oracle caps.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top => 1,
            Formula::And(l, r) => 1 + l.size() + r.size(),
            Formula::Diamond(_, _, body) => 1 + body.size(),
        }
    }

    /// N-mod: the set of modality bases occurring in the formula.
    pub fn n_mod(&self) -> BTreeSet<u32> {
        let mut bases = BTreeSet::new();
        self.collect_modalities(&mut bases, &mut BTreeSet::new());
        bases
    }

    /// O-mod: the set of modality exponents occurring in the formula.
    pub fn o_mod(&self) -> BTreeSet<Ordinal> {
        let mut exponents = BTreeSet::new();
        self.collect_modalities(&mut BTreeSet::new(), &mut exponents);
        exponents
    }

    fn collect_modalities(&self, bases: &mut BTreeSet<u32>, exponents: &mut BTreeSet<Ordinal>) {
        match self {
            Formula::Top => {}
            Formula::And(l, r) => {
                l.collect_modalities(bases, exponents);
                r.collect_modalities(bases, exponents);
            }
            Formula::Diamond(n, alpha, body) => {
                bases.insert(*n);
                exponents.insert(alpha.clone());
                body.collect_modalities(bases, exponents);
            }
        }
    }

    /// True iff the formula lies in the fragment F_{<n}: every modality
    /// base is strictly below n.
    pub fn in_fragment(&self, n: u32) -> bool {
        self.n_mod().last().is_none_or(|max| *max < n)
    }

    /// Views the formula as a worm — a pure modality chain over ⊤ —
    /// or returns `None` if a conjunction occurs.
    pub fn as_worm(&self) -> Option<Worm> {
        let mut modalities = Vec::new();
        let mut current = self;
        loop {
            match current {
                Formula::Top => return Some(Worm { modalities }),
                Formula::And(..) => return None,
                Formula::Diamond(n, alpha, body) => {
                    modalities.push((*n, alpha.clone()));
                    current = body;
                }
            }
        }
    }

    /// Applies the §4 convention that ⟨n⁰⟩φ is just φ: strips every
    /// zero-exponent modality. The calculus compares formulas after this
    /// identification; the parser and printer leave them intact.
    pub fn elide_zero_exponents(&self) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::And(l, r) => {
                Formula::and(l.elide_zero_exponents(), r.elide_zero_exponents())
            }
            Formula::Diamond(_, alpha, body) if alpha.is_zero() => body.elide_zero_exponents(),
            Formula::Diamond(n, alpha, body) => {
                Formula::diamond(*n, alpha.clone(), body.elide_zero_exponents())
            }
        }
    }
}

impl Worm {
    /// The empty worm, ⊤.
    pub fn top() -> Worm {
        Worm {
            modalities: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.modalities.is_empty()
    }

    pub fn len(&self) -> usize {
        self.modalities.len()
    }

    /// Wraps the worm's modalities around a formula, outside-in: for
    /// A = ⟨n₀^{α₀}⟩…⟨n_k^{α_k}⟩⊤ this builds the formula Aφ.
    pub fn prepend_to(&self, formula: Formula) -> Formula {
        self.modalities
            .iter()
            .rev()
            .fold(formula, |acc, (n, alpha)| {
                Formula::diamond(*n, alpha.clone(), acc)
            })
    }

    /// The worm as a plain formula.
    pub fn to_formula(&self) -> Formula {
        self.prepend_to(Formula::Top)
    }
}

impl Sequent {
    pub fn new(antecedent: Formula, succedent: Formula) -> Sequent {
        Sequent {
            antecedent,
            succedent,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("T"),
            Formula::And(l, r) => {
                // A conjunction as a left conjunct needs parentheses to
                // survive the right-nested reading of `/\` chains.
                if matches!(**l, Formula::And(..)) {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " /\\ {r}")
            }
            Formula::Diamond(n, alpha, body) => {
                write!(f, "<{n}^{alpha}>")?;
                // A conjunction under a modality needs parentheses;
                // modalities bind tighter than `/\`.
                if matches!(**body, Formula::And(..)) {
                    write!(f, "({body})")
                } else {
                    write!(f, "{body}")
                }
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({self})")
    }
}

impl fmt::Display for Worm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.antecedent, self.succedent)
    }
}

impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl serde::Serialize for Sequent {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, SyntaxError> {
        let mut parser = FormulaParser {
            src: s,
            pos: 0,
            depth: 0,
        };
        let formula = parser.parse_formula()?;
        parser.skip_ws();
        parser.expect_end()?;
        Ok(formula)
    }
}

impl FromStr for Sequent {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, SyntaxError> {
        let mut parser = FormulaParser {
            src: s,
            pos: 0,
            depth: 0,
        };
        let antecedent = parser.parse_formula()?;
        parser.skip_ws();
        if !parser.eat_str("|-") {
            return Err(parser.error("expected '|-' between antecedent and succedent"));
        }
        let succedent = parser.parse_formula()?;
        parser.skip_ws();
        parser.expect_end()?;
        Ok(Sequent {
            antecedent,
            succedent,
        })
    }
}

struct FormulaParser<'a> {
    src: &'a str,
    pos: usize,
    depth: usize,
}

impl FormulaParser<'_> {
    fn error(&self, message: &str) -> SyntaxError {
        SyntaxError {
            pos: self.pos,
            message: message.to_owned(),
        }
    }

    fn bytes(&self) -> &[u8] {
        self.src.as_bytes()
    }

    fn skip_ws(&mut self) {
        while self
            .bytes()
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes().get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect_end(&self) -> Result<(), SyntaxError> {
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn parse_formula(&mut self) -> Result<Formula, SyntaxError> {
        let mut units = vec![self.parse_unit()?];
        while self.eat_str("/\\") || self.eat_str("&") {
            units.push(self.parse_unit()?);
        }
        // `/\` chains read right-nested, matching the printer.
        let last = units.pop().expect("at least one unit");
        Ok(units.into_iter().rev().fold(last, |acc, u| Formula::and(u, acc)))
    }

    fn parse_unit(&mut self) -> Result<Formula, SyntaxError> {
        // A unit is a (possibly empty) chain of modalities over `T` or a
        // parenthesized formula. The chain is collected iteratively and
        // counted against the nesting limit so that adversarially long
        // chains cannot exhaust the stack later (formula operations
        // recurse on the tree).
        let mut chain = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'<') => {
                    self.pos += 1;
                    if chain.len() + self.depth >= MAX_NESTING {
                        return Err(self.error("formula nests too deeply"));
                    }
                    let base = self.parse_base()?;
                    if !self.eat(b'^') {
                        return Err(self.error("expected '^' after modality base"));
                    }
                    self.skip_ws();
                    let (exponent, next) = ordinal::parse_prefix(self.src, self.pos)?;
                    self.pos = next;
                    if !self.eat(b'>') {
                        return Err(self.error("expected '>' closing the modality"));
                    }
                    chain.push((base, exponent));
                }
                Some(b'T') => {
                    self.pos += 1;
                    return Ok(Worm { modalities: chain }.prepend_to(Formula::Top));
                }
                Some(b'(') => {
                    self.pos += 1;
                    self.depth += chain.len() + 1;
                    if self.depth > MAX_NESTING {
                        return Err(self.error("formula nests too deeply"));
                    }
                    let inner = self.parse_formula()?;
                    self.depth -= chain.len() + 1;
                    if !self.eat(b')') {
                        return Err(self.error("expected ')'"));
                    }
                    return Ok(Worm { modalities: chain }.prepend_to(inner));
                }
                _ => return Err(self.error("expected 'T', '<', or '('")),
            }
        }
    }

    fn parse_base(&mut self) -> Result<u32, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a modality base"));
        }
        self.src[start..self.pos]
            .parse::<u32>()
            .ok()
            .filter(|b| *b <= MAX_PARSED_HEIGHT)
            .ok_or_else(|| self.error("modality base is too large"))
    }
}
