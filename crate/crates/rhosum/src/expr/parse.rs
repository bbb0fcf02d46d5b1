//! Parser for the summation input language.
//!
//! Calls use square brackets, ranges use braces:
//!
//! ```text
//! Sum[Binomial[n,k] * Sum[Binomial[k,j] * S[1,j]^2, {j,0,k}], {k,0,n}]
//! ```
//!
//! Heads: Sum, Product (one or more ranges, first range outermost),
//! Binomial, Pochhammer, Factorial, Power, and S for harmonic-type sums
//! (S[r1,...,rm,{x1,...,xm},upper]; the scale list may be omitted when all
//! scales are 1). Infix +, -, *, /, ^ with the usual precedence, unary
//! minus, parentheses. An upper bound may be Infinity; such a bound parses
//! but cannot be evaluated.
//!
//! Names are classified against the declared parameter list and the
//! quantifier scope: anything else is an unbound-variable error. A second
//! entry point, [`parse`], additionally peels the outer chain of sums into
//! a [`SumSpec`] with validated bounds (integer-linear, constant nonnegative
//! lower ends).

use super::{expr_to_linform, Quant, QuantUpper, SumExpr, SumSpec, Upper};
use crate::rat::{rat_int, BigRat};
use num::bigint::BigInt;
use num::{One, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unbound variable {name}")]
    Unbound { name: String },
    #[error("summation bound is not integer-linear: {text}")]
    NonLinearBound { text: String },
}

fn syn(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        pos,
        msg: msg.into(),
    }
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Num(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().unwrap();
                out.push((Tok::Num(n), start));
            }
            b'+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b'[' => {
                out.push((Tok::LBrack, i));
                i += 1;
            }
            b']' => {
                out.push((Tok::RBrack, i));
                i += 1;
            }
            b'{' => {
                out.push((Tok::LBrace, i));
                i += 1;
            }
            b'}' => {
                out.push((Tok::RBrace, i));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, i));
                i += 1;
            }
            _ => {
                // name: letters, digits after the first, underscores; also
                // the infinity glyph
                if text[i..].starts_with('\u{221e}') {
                    out.push((Tok::Name("Infinity".to_string()), i));
                    i += '\u{221e}'.len_utf8();
                } else if c.is_ascii_alphabetic() || c == b'_' {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    out.push((Tok::Name(text[start..i].to_string()), start));
                } else {
                    return Err(syn(i, format!("unexpected character {:?}", text[i..].chars().next().unwrap())));
                }
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syn(self.here(), format!("expected {}", what)))
        }
    }

    fn expr(&mut self) -> Result<SumExpr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    terms.push(neg_fold(self.term()?));
                }
                _ => break,
            }
        }
        Ok(SumExpr::add(terms))
    }

    // A leading '-' applies to the whole product, so "-a*b" is -(a*b).
    fn term(&mut self) -> Result<SumExpr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(neg_fold(self.term()?));
        }
        self.product()
    }

    fn product(&mut self) -> Result<SumExpr, ParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.power()?;
                    acc = match acc {
                        SumExpr::Mul(mut fs) => {
                            fs.push(rhs);
                            SumExpr::Mul(fs)
                        }
                        other => SumExpr::Mul(vec![other, rhs]),
                    };
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.power()?;
                    acc = div_fold(acc, rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<SumExpr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.exponent()?; // right-associative
            return Ok(SumExpr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<SumExpr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(neg_fold(self.exponent()?)); // allows 2^-k
        }
        self.power()
    }

    fn atom(&mut self) -> Result<SumExpr, ParseError> {
        let pos = self.here();
        match self.next() {
            Some(Tok::Num(n)) => Ok(SumExpr::Int(rat_int(n))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.eat(&Tok::RParen, ")")?;
                Ok(e)
            }
            Some(Tok::Name(name)) => {
                if self.peek() == Some(&Tok::LBrack) {
                    self.pos += 1;
                    let e = self.call(&name, pos)?;
                    self.eat(&Tok::RBrack, "]")?;
                    Ok(e)
                } else {
                    Ok(SumExpr::Param(name)) // classified later
                }
            }
            Some(t) => Err(syn(pos, format!("unexpected token {:?}", t))),
            None => Err(syn(pos, "unexpected end of input")),
        }
    }

    fn call(&mut self, head: &str, pos: usize) -> Result<SumExpr, ParseError> {
        match head {
            "Sum" | "Product" => {
                let body = self.expr()?;
                let mut ranges = Vec::new();
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    ranges.push(self.range_triple()?);
                }
                if ranges.is_empty() {
                    return Err(syn(pos, "Sum/Product needs at least one {index, lower, upper} range"));
                }
                let mut acc = body;
                for (index, lower, upper) in ranges.into_iter().rev() {
                    acc = if head == "Sum" {
                        SumExpr::Sum {
                            index,
                            lower: Box::new(lower),
                            upper,
                            body: Box::new(acc),
                        }
                    } else {
                        SumExpr::Product {
                            index,
                            lower: Box::new(lower),
                            upper,
                            body: Box::new(acc),
                        }
                    };
                }
                Ok(acc)
            }
            "Binomial" | "Pochhammer" | "Power" => {
                let a = self.expr()?;
                self.eat(&Tok::Comma, ",")?;
                let b = self.expr()?;
                Ok(match head {
                    "Binomial" => SumExpr::Binomial(Box::new(a), Box::new(b)),
                    "Pochhammer" => SumExpr::Pochhammer(Box::new(a), Box::new(b)),
                    _ => SumExpr::Pow(Box::new(a), Box::new(b)),
                })
            }
            "Factorial" => Ok(SumExpr::Factorial(Box::new(self.expr()?))),
            "S" => self.harmonic_call(pos),
            _ => Err(syn(pos, format!("unknown function {}", head))),
        }
    }

    // S[r1, ..., rm, {x1, ..., xm}, upper] with the scale list optional.
    fn harmonic_call(&mut self, pos: usize) -> Result<SumExpr, ParseError> {
        enum Arg {
            E(SumExpr),
            L(Vec<SumExpr>),
        }
        let mut args = Vec::new();
        loop {
            if self.peek() == Some(&Tok::LBrace) {
                self.pos += 1;
                let mut list = vec![self.expr()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    list.push(self.expr()?);
                }
                self.eat(&Tok::RBrace, "}")?;
                args.push(Arg::L(list));
            } else {
                args.push(Arg::E(self.expr()?));
            }
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if args.len() < 2 {
            return Err(syn(pos, "S needs weights and an upper bound"));
        }
        let upper = match args.pop().unwrap() {
            Arg::E(e) => e,
            Arg::L(_) => return Err(syn(pos, "the last argument of S is the upper bound")),
        };
        let mut scales: Option<Vec<BigRat>> = None;
        if let Some(Arg::L(_)) = args.last() {
            let Some(Arg::L(list)) = args.pop() else {
                unreachable!()
            };
            let mut xs = Vec::new();
            for e in list {
                let v = e
                    .eval_exact(&HashMap::new())
                    .map_err(|_| syn(pos, "S scales must be rational constants"))?;
                xs.push(v);
            }
            scales = Some(xs);
        }
        let mut weights = Vec::new();
        for a in args {
            let Arg::E(e) = a else {
                return Err(syn(pos, "unexpected list among S weights"));
            };
            let v = e
                .eval_exact(&HashMap::new())
                .ok()
                .and_then(|v| crate::rat::as_i64(&v))
                .filter(|&w| w > 0)
                .ok_or_else(|| syn(pos, "S weights must be positive integers"))?;
            weights.push(v);
        }
        let scales = scales.unwrap_or_else(|| vec![BigRat::one(); weights.len()]);
        if scales.len() != weights.len() {
            return Err(syn(pos, "S needs one scale per weight"));
        }
        Ok(SumExpr::Harmonic {
            weights,
            scales,
            upper: Box::new(upper),
        })
    }

    fn range_triple(&mut self) -> Result<(String, SumExpr, Upper), ParseError> {
        let pos = self.here();
        self.eat(&Tok::LBrace, "{")?;
        let index = match self.next() {
            Some(Tok::Name(n)) => n,
            _ => return Err(syn(pos, "range index must be a name")),
        };
        self.eat(&Tok::Comma, ",")?;
        let lower = self.expr()?;
        self.eat(&Tok::Comma, ",")?;
        let upper = if let Some(Tok::Name(n)) = self.peek() {
            if n == "Infinity" {
                self.pos += 1;
                Upper::Infinity
            } else {
                Upper::Finite(Box::new(self.expr()?))
            }
        } else {
            Upper::Finite(Box::new(self.expr()?))
        };
        self.eat(&Tok::RBrace, "}")?;
        Ok((index, lower, upper))
    }
}

// Classify raw names into parameters and bound variables; reject the rest.
fn classify(
    e: &SumExpr,
    params: &[String],
    scope: &mut Vec<String>,
) -> Result<SumExpr, ParseError> {
    Ok(match e {
        SumExpr::Int(_) => e.clone(),
        SumExpr::Param(n) | SumExpr::BoundVar(n) => {
            if scope.contains(n) {
                SumExpr::BoundVar(n.clone())
            } else if params.contains(n) {
                SumExpr::Param(n.clone())
            } else {
                return Err(ParseError::Unbound { name: n.clone() });
            }
        }
        SumExpr::Add(ts) => SumExpr::Add(
            ts.iter()
                .map(|t| classify(t, params, scope))
                .collect::<Result<_, _>>()?,
        ),
        SumExpr::Mul(ts) => SumExpr::Mul(
            ts.iter()
                .map(|t| classify(t, params, scope))
                .collect::<Result<_, _>>()?,
        ),
        SumExpr::Neg(x) => SumExpr::Neg(Box::new(classify(x, params, scope)?)),
        SumExpr::Div(a, b) => SumExpr::Div(
            Box::new(classify(a, params, scope)?),
            Box::new(classify(b, params, scope)?),
        ),
        SumExpr::Pow(a, b) => SumExpr::Pow(
            Box::new(classify(a, params, scope)?),
            Box::new(classify(b, params, scope)?),
        ),
        SumExpr::Binomial(a, b) => SumExpr::Binomial(
            Box::new(classify(a, params, scope)?),
            Box::new(classify(b, params, scope)?),
        ),
        SumExpr::Pochhammer(a, b) => SumExpr::Pochhammer(
            Box::new(classify(a, params, scope)?),
            Box::new(classify(b, params, scope)?),
        ),
        SumExpr::Factorial(a) => SumExpr::Factorial(Box::new(classify(a, params, scope)?)),
        SumExpr::Harmonic {
            weights,
            scales,
            upper,
        } => SumExpr::Harmonic {
            weights: weights.clone(),
            scales: scales.clone(),
            upper: Box::new(classify(upper, params, scope)?),
        },
        SumExpr::Sum {
            index,
            lower,
            upper,
            body,
        }
        | SumExpr::Product {
            index,
            lower,
            upper,
            body,
        } => {
            if params.contains(index) {
                return Err(ParseError::Syntax {
                    pos: 0,
                    msg: format!("index {} shadows a declared parameter", index),
                });
            }
            if scope.contains(index) {
                return Err(ParseError::Syntax {
                    pos: 0,
                    msg: format!("index {} shadows an enclosing index", index),
                });
            }
            let l = classify(lower, params, scope)?;
            let u = match upper {
                Upper::Finite(x) => Upper::Finite(Box::new(classify(x, params, scope)?)),
                Upper::Infinity => Upper::Infinity,
            };
            scope.push(index.clone());
            let b = classify(body, params, scope)?;
            scope.pop();
            match e {
                SumExpr::Sum { .. } => SumExpr::Sum {
                    index: index.clone(),
                    lower: Box::new(l),
                    upper: u,
                    body: Box::new(b),
                },
                _ => SumExpr::Product {
                    index: index.clone(),
                    lower: Box::new(l),
                    upper: u,
                    body: Box::new(b),
                },
            }
        }
    })
}

/// Parse a single expression. `free_indices` are names admitted as bound
/// variables without an enclosing quantifier (used when parsing a summand
/// on its own, where the summation index is free).
pub fn parse_expr(
    text: &str,
    params: &[String],
    free_indices: &[String],
) -> Result<SumExpr, ParseError> {
    let toks = lex(text)?;
    let end = text.len();
    let mut p = Parser { toks, pos: 0, end };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(syn(p.here(), "trailing input"));
    }
    let mut scope: Vec<String> = free_indices.to_vec();
    classify(&e, params, &mut scope)
}

/// Parse a full summation problem and peel its quantifier prefix.
pub fn parse(text: &str, params: &[String], rec_param: &str) -> Result<SumSpec, ParseError> {
    let e = parse_expr(text, params, &[])?;
    let mut quants = Vec::new();
    let summand = peel(&e, &mut quants)?;
    Ok(SumSpec {
        params: params.to_vec(),
        rec_param: rec_param.to_string(),
        quants,
        summand,
        start_offsets: HashMap::new(),
    })
}

// Absorb unary minus into a leading numeric literal where one exists, so
// the parse of rendered output reproduces the original tree.
fn neg_fold(e: SumExpr) -> SumExpr {
    match e {
        SumExpr::Int(c) => SumExpr::Int(-c),
        SumExpr::Neg(x) => *x,
        SumExpr::Mul(mut fs) if matches!(fs.first(), Some(SumExpr::Int(_))) => {
            let head = neg_fold(fs.remove(0));
            fs.insert(0, head);
            SumExpr::Mul(fs)
        }
        SumExpr::Div(a, b) if neg_absorbs(&a) => {
            SumExpr::Div(Box::new(neg_fold(*a)), b)
        }
        other => SumExpr::Neg(Box::new(other)),
    }
}

fn neg_absorbs(e: &SumExpr) -> bool {
    match e {
        SumExpr::Int(_) => true,
        SumExpr::Mul(fs) => matches!(fs.first(), Some(SumExpr::Int(_))),
        SumExpr::Div(a, _) => neg_absorbs(a),
        _ => false,
    }
}

// Quotients of literals are plain rational constants.
fn div_fold(a: SumExpr, b: SumExpr) -> SumExpr {
    if let (SumExpr::Int(x), SumExpr::Int(y)) = (&a, &b) {
        if !y.is_zero() {
            return SumExpr::Int(x / y);
        }
    }
    SumExpr::Div(Box::new(a), Box::new(b))
}

// Split a product into factors, folding Neg into a -1 factor.
fn flatten_product(e: &SumExpr) -> Vec<SumExpr> {
    match e {
        SumExpr::Mul(fs) => fs.iter().flat_map(flatten_product).collect(),
        SumExpr::Neg(x) => {
            let mut v = vec![SumExpr::int(-1)];
            v.extend(flatten_product(x));
            v
        }
        _ => vec![e.clone()],
    }
}

// Peel the chain of sums: each quantifier owns the body factors that stand
// between it and the unique deeper sum (its weight); the innermost body is
// the summand.
fn peel(e: &SumExpr, quants: &mut Vec<Quant>) -> Result<SumExpr, ParseError> {
    let SumExpr::Sum {
        index,
        lower,
        upper,
        body,
    } = e
    else {
        return Ok(e.clone());
    };
    let lower_lin = expr_to_linform(lower)
        .and_then(|l| l.as_constant())
        .filter(|&c| c >= 0)
        .ok_or_else(|| ParseError::NonLinearBound {
            text: lower.render(),
        })?;
    let upper_q = match upper {
        Upper::Infinity => QuantUpper::Infinite,
        Upper::Finite(u) => QuantUpper::Linear(expr_to_linform(u).ok_or_else(|| {
            ParseError::NonLinearBound { text: u.render() }
        })?),
    };
    let factors = flatten_product(body);
    let sums: Vec<usize> = factors
        .iter()
        .enumerate()
        .filter(|(_, f)| matches!(f, SumExpr::Sum { .. }))
        .map(|(i, _)| i)
        .collect();
    if sums.len() == 1 {
        let sum_idx = sums[0];
        let weight = SumExpr::mul(
            factors
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != sum_idx)
                .map(|(_, f)| f.clone())
                .collect(),
        );
        quants.push(Quant {
            index: index.clone(),
            lower: lower_lin,
            upper: upper_q,
            weight,
        });
        peel(&factors[sum_idx], quants)
    } else {
        quants.push(Quant {
            index: index.clone(),
            lower: lower_lin,
            upper: upper_q,
            weight: SumExpr::int(1),
        });
        Ok(body.as_ref().clone())
    }
}
