//! Evaluator for the `ord` command: ordinal expressions over `w`,
//! natural numbers, `+`, `*`, `w^...`, hyper-exponential applications
//! `e^n(...)`, and a top-level comparison form `cmp(a, b)`.
//!
//! The grammar extends the plain ordinal literal grammar with evaluated
//! subexpressions, so `w^(w+1)*(2+1)` and `e^2(w*2)` are both fine:
//!
//! ```text
//! top    := 'cmp' '(' expr ',' expr ')' | expr
//! expr   := term ('+' term)*
//! term   := factor ('*' factor)*
//! factor := 'w' ('^' factor)? | nat | '(' expr ')' | 'e' '^' nat '(' expr ')'
//! ```

use num_bigint::BigUint;
use std::cmp::Ordering;
use tsc::ordinal::{hyper_exp, SyntaxError};
use tsc::Ordinal;

#[derive(Debug)]
pub enum Evaluation {
    Value(Ordinal),
    Comparison(Ordinal, Ordering, Ordinal),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Nat(BigUint),
    W,
    E,
    Cmp,
    Plus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn err(pos: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        pos,
        message: message.into(),
    }
}

fn lex(input: &str) -> Result<Vec<(usize, Token)>, SyntaxError> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' => i += 1,
            b'+' | b'*' | b'^' | b'(' | b')' | b',' => {
                let token = match c {
                    b'+' => Token::Plus,
                    b'*' => Token::Star,
                    b'^' => Token::Caret,
                    b'(' => Token::LParen,
                    b')' => Token::RParen,
                    _ => Token::Comma,
                };
                tokens.push((i, token));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &input[start..i];
                let value = digits
                    .parse::<BigUint>()
                    .map_err(|_| err(start, "invalid number"))?;
                tokens.push((start, Token::Nat(value)));
            }
            _ if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word = &input[start..i];
                let token = match word {
                    "w" => Token::W,
                    "e" => Token::E,
                    "cmp" => Token::Cmp,
                    other => return Err(err(start, format!("unknown name `{other}`"))),
                };
                tokens.push((start, token));
            }
            _ => return Err(err(i, format!("unexpected character `{}`", c as char))),
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    index: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a (usize, Token)> {
        self.tokens.get(self.index)
    }

    fn next_pos(&self) -> usize {
        self.peek().map(|(pos, _)| *pos).unwrap_or(self.end)
    }

    fn eat(&mut self, expected: &Token, what: &str) -> Result<usize, SyntaxError> {
        match self.peek() {
            Some((pos, token)) if token == expected => {
                self.index += 1;
                Ok(*pos)
            }
            _ => Err(err(self.next_pos(), format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<Ordinal, SyntaxError> {
        let mut value = self.term()?;
        while matches!(self.peek(), Some((_, Token::Plus))) {
            self.index += 1;
            value = value + self.term()?;
        }
        Ok(value)
    }

    fn term(&mut self) -> Result<Ordinal, SyntaxError> {
        let mut value = self.factor()?;
        while matches!(self.peek(), Some((_, Token::Star))) {
            self.index += 1;
            value = value * self.factor()?;
        }
        Ok(value)
    }

    fn factor(&mut self) -> Result<Ordinal, SyntaxError> {
        let Some((pos, token)) = self.peek() else {
            return Err(err(self.end, "expected an ordinal"));
        };
        let pos = *pos;
        match token {
            Token::Nat(value) => {
                self.index += 1;
                Ok(Ordinal::natural(value.clone()))
            }
            Token::W => {
                self.index += 1;
                if matches!(self.peek(), Some((_, Token::Caret))) {
                    self.index += 1;
                    Ok(Ordinal::omega_power(self.factor()?))
                } else {
                    Ok(Ordinal::omega())
                }
            }
            Token::LParen => {
                self.index += 1;
                let value = self.expr()?;
                self.eat(&Token::RParen, "`)`")?;
                Ok(value)
            }
            Token::E => {
                self.index += 1;
                self.eat(&Token::Caret, "`^` after `e`")?;
                let height_pos = self.next_pos();
                let Some((_, Token::Nat(height))) = self.peek() else {
                    return Err(err(height_pos, "expected a natural number after `e^`"));
                };
                let height =
                    u32::try_from(height).map_err(|_| err(height_pos, "hyper-exponential height too large"))?;
                self.index += 1;
                self.eat(&Token::LParen, "`(`")?;
                let argument = self.expr()?;
                self.eat(&Token::RParen, "`)`")?;
                Ok(hyper_exp(height, &argument))
            }
            Token::Cmp => Err(err(pos, "cmp(...) is only allowed at the top level")),
            _ => Err(err(pos, "expected an ordinal")),
        }
    }
}

pub fn evaluate(input: &str) -> Result<Evaluation, SyntaxError> {
    let tokens = lex(input)?;
    let mut parser = Parser {
        tokens: &tokens,
        index: 0,
        end: input.len(),
    };
    let evaluation = if matches!(parser.peek(), Some((_, Token::Cmp))) {
        parser.index += 1;
        parser.eat(&Token::LParen, "`(`")?;
        let left = parser.expr()?;
        parser.eat(&Token::Comma, "`,`")?;
        let right = parser.expr()?;
        parser.eat(&Token::RParen, "`)`")?;
        let ordering = left.cmp(&right);
        Evaluation::Comparison(left, ordering, right)
    } else {
        Evaluation::Value(parser.expr()?)
    };
    if let Some((pos, _)) = parser.peek() {
        return Err(err(*pos, "unexpected trailing input"));
    }
    Ok(evaluation)
}
