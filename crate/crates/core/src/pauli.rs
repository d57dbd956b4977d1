//! Pauli-string expressions such as `(3III+XII-2XYI+3XYZ)/4`.
//!
//! An expression is a real-weighted sum of Pauli words with an optional
//! positive divisor. Parsing normalizes the expression: repeated words are
//! merged (keeping the position of their first occurrence) and terms whose
//! coefficient becomes zero are dropped.
//!
//! Grammar (whitespace is ignored everywhere):
//!
//! ```text
//! expr    = "(" sum ")" [ "/" number ] | sum ;
//! sum     = term { ("+" | "-") term } ;
//! term    = [ "+" | "-" ] [ number [ "*" ] ] word ;
//! word    = letter { letter } ;
//! letter  = "I" | "X" | "Y" | "Z" ;
//! number  = digits [ "." [ digits ] ] | "." digits ;
//! ```
//!
//! The leftmost letter of a word is the most significant tensor factor, so
//! `XII` acts with `X` on the first qubit.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, HermitianOperator};

/// Default cap on the number of qubits an expression may address.
pub const DEFAULT_MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// The 2×2 matrix in the basis |0⟩ = (1, 0)ᵀ, |1⟩ = (0, 1)ᵀ.
    pub fn matrix(self) -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => ComplexMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => ComplexMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => ComplexMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => ComplexMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
}

/// A tensor product of single-qubit Paulis, leftmost factor first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliWord(Vec<Pauli>);

impl PauliWord {
    pub fn new(letters: Vec<Pauli>) -> Option<Self> {
        if letters.is_empty() {
            None
        } else {
            Some(PauliWord(letters))
        }
    }

    pub fn identity(n: usize) -> Self {
        PauliWord(vec![Pauli::I; n.max(1)])
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks `(flip, phase, n_y)`: the word maps column `c` to row
    /// `c ^ flip` with amplitude `i^n_y · (-1)^popcount(c & phase)`.
    fn masks(&self) -> (usize, usize, u32) {
        let n = self.0.len();
        let mut flip = 0usize;
        let mut phase = 0usize;
        let mut n_y = 0u32;
        for (k, p) in self.0.iter().enumerate() {
            let bit = 1usize << (n - 1 - k);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                    n_y += 1;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, n_y)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedEnd,
    MissingWord,
    BadNumber,
    NonRealCoefficient,
    ZeroDivisor,
    InconsistentLength { expected: usize, found: usize },
    TooManyQubits { max: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        write!(f, "pauli expression error at offset {}: ", self.position)?;
        match &self.kind {
            Empty => write!(f, "empty expression"),
            UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            UnexpectedEnd => write!(f, "unexpected end of input"),
            MissingWord => write!(f, "expected a Pauli word (letters I, X, Y, Z)"),
            BadNumber => write!(f, "malformed number"),
            NonRealCoefficient => write!(f, "complex coefficients are not supported"),
            ZeroDivisor => write!(f, "divisor must be positive"),
            InconsistentLength { expected, found } => {
                write!(f, "word has {found} letters, expected {expected}")
            }
            TooManyQubits { max, found } => {
                write!(f, "{found} qubits exceeds the limit of {max}")
            }
        }
    }
}

/// A normalized Pauli-string expression `(Σ c_k W_k) / divisor`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliExpr {
    terms: Vec<(f64, PauliWord)>,
    divisor: f64,
    n_qubits: usize,
}

impl PauliExpr {
    /// Builds a normalized expression. Panics if word lengths disagree or the
    /// divisor is not positive; use [`parse`] for untrusted input.
    pub fn new(terms: Vec<(f64, PauliWord)>, divisor: f64, n_qubits: usize) -> Self {
        assert!(
            divisor > 0.0 && divisor.is_finite(),
            "divisor must be positive"
        );
        assert!(n_qubits >= 1);
        assert!(terms.iter().all(|(_, w)| w.len() == n_qubits));
        let mut merged: Vec<(f64, PauliWord)> = Vec::with_capacity(terms.len());
        for (c, w) in terms {
            match merged.iter_mut().find(|(_, m)| *m == w) {
                Some(slot) => slot.0 += c,
                None => merged.push((c, w)),
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        PauliExpr {
            terms: merged,
            divisor,
            n_qubits,
        }
    }

    pub fn terms(&self) -> &[(f64, PauliWord)] {
        &self.terms
    }

    pub fn divisor(&self) -> f64 {
        self.divisor
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Coefficient of the all-identity word, before division.
    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|(_, w)| w.is_identity())
            .map_or(0.0, |(c, _)| *c)
    }

    /// Lowers the expression to its dense `2ⁿ × 2ⁿ` matrix.
    pub fn to_matrix(&self) -> HermitianOperator {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        const I_POW: [Complex64; 4] = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for (c, w) in &self.terms {
            let (flip, phase, n_y) = w.masks();
            let base = I_POW[(n_y % 4) as usize] * (*c / self.divisor);
            for col in 0..dim {
                let sign = if (col & phase).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                m[(col ^ flip, col)] += base * sign;
            }
        }
        HermitianOperator::new(m).expect("real-weighted Pauli sums are Hermitian")
    }
}

impl fmt::Display for PauliExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut body = String::new();
        if self.terms.is_empty() {
            body.push_str(&format!("0{}", PauliWord::identity(self.n_qubits)));
        }
        for (k, (c, w)) in self.terms.iter().enumerate() {
            if *c < 0.0 {
                body.push('-');
            } else if k > 0 {
                body.push('+');
            }
            let mag = c.abs();
            if mag != 1.0 {
                body.push_str(&mag.to_string());
            }
            body.push_str(&w.to_string());
        }
        if self.divisor == 1.0 {
            f.write_str(&body)
        } else {
            write!(f, "({body})/{}", self.divisor)
        }
    }
}

/// Canonical text form; `parse(&format(e))` reproduces `e`.
pub fn format(expr: &PauliExpr) -> String {
    expr.to_string()
}

pub fn parse(text: &str) -> Result<PauliExpr, ParseError> {
    parse_with_limit(text, DEFAULT_MAX_QUBITS)
}

pub fn parse_with_limit(text: &str, max_qubits: usize) -> Result<PauliExpr, ParseError> {
    Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        max_qubits,
    }
    .expr()
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    max_qubits: usize,
}

impl Parser<'_> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            position: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn unexpected(&mut self) -> ParseError {
        match self.peek() {
            Some(c) => self.err(ParseErrorKind::UnexpectedChar(c)),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(mut self) -> Result<PauliExpr, ParseError> {
        if self.peek().is_none() {
            return Err(self.err(ParseErrorKind::Empty));
        }
        let parenthesized = self.eat('(');
        let terms = self.sum()?;
        let mut divisor = 1.0;
        if parenthesized {
            if !self.eat(')') {
                return Err(self.unexpected());
            }
            if self.eat('/') {
                let at = self.pos;
                divisor = self.number()?.ok_or_else(|| self.unexpected())?;
                if divisor == 0.0 {
                    return Err(ParseError {
                        kind: ParseErrorKind::ZeroDivisor,
                        position: at,
                    });
                }
            }
        }
        if self.peek().is_some() {
            return Err(self.unexpected());
        }
        let n = terms[0].1.len();
        Ok(PauliExpr::new(terms, divisor, n))
    }

    fn sum(&mut self) -> Result<Vec<(f64, PauliWord)>, ParseError> {
        let mut terms = Vec::new();
        let mut n_qubits = None;
        loop {
            let sign = if self.eat('-') {
                -1.0
            } else {
                self.eat('+');
                1.0
            };
            let coeff = self.number()?;
            if coeff.is_some() {
                self.eat('*');
            }
            let start = {
                self.skip_ws();
                self.pos
            };
            let word = self.word()?;
            match n_qubits {
                None => {
                    if word.len() > self.max_qubits {
                        return Err(ParseError {
                            kind: ParseErrorKind::TooManyQubits {
                                max: self.max_qubits,
                                found: word.len(),
                            },
                            position: start,
                        });
                    }
                    n_qubits = Some(word.len());
                }
                Some(n) if n != word.len() => {
                    return Err(ParseError {
                        kind: ParseErrorKind::InconsistentLength {
                            expected: n,
                            found: word.len(),
                        },
                        position: start,
                    });
                }
                Some(_) => {}
            }
            terms.push((sign * coeff.unwrap_or(1.0), word));
            match self.peek() {
                Some('+') | Some('-') => continue,
                _ => return Ok(terms),
            }
        }
    }

    fn word(&mut self) -> Result<PauliWord, ParseError> {
        self.skip_ws();
        let mut letters = Vec::new();
        while let Some(p) = self.src[self.pos..]
            .chars()
            .next()
            .and_then(Pauli::from_char)
        {
            letters.push(p);
            self.pos += 1;
        }
        if letters.is_empty() {
            return Err(match self.peek() {
                Some('i') | Some('j') => self.err(ParseErrorKind::NonRealCoefficient),
                Some(_) | None => self.err(ParseErrorKind::MissingWord),
            });
        }
        Ok(PauliWord(letters))
    }

    fn number(&mut self) -> Result<Option<f64>, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut end = start;
        let mut seen_digit = false;
        let mut seen_dot = false;
        while end < self.bytes.len() {
            match self.bytes[end] {
                b'0'..=b'9' => seen_digit = true,
                b'.' if !seen_dot => seen_dot = true,
                _ => break,
            }
            end += 1;
        }
        if end == start {
            return Ok(None);
        }
        if !seen_digit {
            return Err(self.err(ParseErrorKind::BadNumber));
        }
        let value: f64 = self.src[start..end]
            .parse()
            .map_err(|_| self.err(ParseErrorKind::BadNumber))?;
        self.pos = end;
        if matches!(self.bytes.get(end), Some(b'i') | Some(b'j')) {
            return Err(self.err(ParseErrorKind::NonRealCoefficient));
        }
        Ok(Some(value))
    }
}
