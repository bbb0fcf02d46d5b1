//! The input language: nested-sum expressions with exact evaluation.
//!
//! A summation problem arrives as text like
//!
//! ```text
//! Sum[Binomial[n,k] * Sum[Binomial[k,j] * S[1,j]^2, {j,0,k}], {k,0,n}]
//! ```
//!
//! and is parsed into a [`SumExpr`] tree plus a [`SumSpec`] describing the
//! quantifier structure (innermost quantifier last), the free parameters,
//! and the distinguished recurrence parameter. `eval_exact` evaluates any
//! closed expression to a `BigRat` and is the ground-truth oracle the whole
//! solver stack is tested against: every recurrence the pipeline produces is
//! re-checked by evaluating both sides exactly at integer points.
//!
//! Supported atoms beyond field arithmetic: binomial coefficients,
//! factorials, Pochhammer symbols, power products c^k, harmonic-type nested
//! sums S[r1,...,rm,{x1,...,xm},upper] with
//! S_{r}(x; n) = sum of x^k / k^r for k = 1..n (deeper weights nest over the
//! prefix range), and explicit Sum/Product quantifiers. Empty ranges are
//! legal and evaluate to 0 (sums) or 1 (products); bounds below lower-1 are
//! range violations. Infinite upper bounds parse but never evaluate.

pub mod lin;
mod parse;

pub use lin::{expr_to_linform, LinForm};
pub use parse::{parse, parse_expr, ParseError};

use crate::rat::{as_i64, binomial_int, pochhammer, rat, rat_pow, rat_to_string, BigRat};
use num::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Upper bound of a quantifier.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Upper {
    Finite(Box<SumExpr>),
    Infinity,
}

/// A nested-sum expression.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SumExpr {
    /// Rational constant.
    Int(BigRat),
    /// Free parameter of the problem (member of the constant field).
    Param(String),
    /// Variable bound by an enclosing quantifier.
    BoundVar(String),
    Add(Vec<SumExpr>),
    Mul(Vec<SumExpr>),
    Neg(Box<SumExpr>),
    Div(Box<SumExpr>, Box<SumExpr>),
    /// base ^ exponent; the exponent must evaluate to an integer.
    Pow(Box<SumExpr>, Box<SumExpr>),
    Binomial(Box<SumExpr>, Box<SumExpr>),
    Pochhammer(Box<SumExpr>, Box<SumExpr>),
    Factorial(Box<SumExpr>),
    /// Nested harmonic-type sum: weights, per-weight scales, upper bound.
    Harmonic {
        weights: Vec<i64>,
        scales: Vec<BigRat>,
        upper: Box<SumExpr>,
    },
    Sum {
        index: String,
        lower: Box<SumExpr>,
        upper: Upper,
        body: Box<SumExpr>,
    },
    Product {
        index: String,
        lower: Box<SumExpr>,
        upper: Upper,
        body: Box<SumExpr>,
    },
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent {0} is not an integer")]
    NonIntegerExponent(String),
    #[error("{0} requires an integer argument, got {1}")]
    NonIntegerArgument(&'static str, String),
    #[error("factorial of negative integer {0}")]
    NegativeFactorial(i64),
    #[error("infinite upper bound cannot be evaluated")]
    InfiniteBound,
    #[error("range for {index} runs from {lower} to {upper}, below the empty range")]
    RangeViolation {
        index: String,
        lower: i64,
        upper: i64,
    },
}

impl SumExpr {
    pub fn int(n: i64) -> Self {
        SumExpr::Int(rat(n))
    }

    pub fn add(ts: Vec<SumExpr>) -> Self {
        let flat: Vec<SumExpr> = ts
            .into_iter()
            .flat_map(|t| match t {
                SumExpr::Add(inner) => inner,
                other => vec![other],
            })
            .collect();
        match flat.len() {
            0 => SumExpr::int(0),
            1 => flat.into_iter().next().unwrap(),
            _ => SumExpr::Add(flat),
        }
    }

    pub fn mul(ts: Vec<SumExpr>) -> Self {
        let flat: Vec<SumExpr> = ts
            .into_iter()
            .flat_map(|t| match t {
                SumExpr::Mul(inner) => inner,
                other => vec![other],
            })
            .collect();
        match flat.len() {
            0 => SumExpr::int(1),
            1 => flat.into_iter().next().unwrap(),
            _ => SumExpr::Mul(flat),
        }
    }

    pub fn pow_int(base: SumExpr, e: i64) -> Self {
        SumExpr::Pow(Box::new(base), Box::new(SumExpr::int(e)))
    }

    /// The variable name, for either variable node kind.
    pub fn var_name(&self) -> Option<&str> {
        match self {
            SumExpr::Param(n) | SumExpr::BoundVar(n) => Some(n),
            _ => None,
        }
    }

    /// Exact evaluation with all free names bound to rationals.
    pub fn eval_exact(&self, binding: &HashMap<String, BigRat>) -> Result<BigRat, EvalError> {
        match self {
            SumExpr::Int(c) => Ok(c.clone()),
            SumExpr::Param(n) | SumExpr::BoundVar(n) => binding
                .get(n)
                .cloned()
                .ok_or_else(|| EvalError::Unbound(n.clone())),
            SumExpr::Add(ts) => {
                let mut acc = BigRat::zero();
                for t in ts {
                    acc += t.eval_exact(binding)?;
                }
                Ok(acc)
            }
            SumExpr::Mul(ts) => {
                let mut acc = BigRat::one();
                for t in ts {
                    acc *= t.eval_exact(binding)?;
                    if acc.is_zero() {
                        // keep evaluating for error detection? no: sums with
                        // zero factors are common; remaining factors may pole
                        // only outside the supported range, so short-circuit.
                        return Ok(acc);
                    }
                }
                Ok(acc)
            }
            SumExpr::Neg(x) => Ok(-x.eval_exact(binding)?),
            SumExpr::Div(a, b) => {
                let d = b.eval_exact(binding)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(a.eval_exact(binding)? / d)
            }
            SumExpr::Pow(b, e) => {
                let ev = e.eval_exact(binding)?;
                let exp = as_i64(&ev)
                    .ok_or_else(|| EvalError::NonIntegerExponent(rat_to_string(&ev)))?;
                let base = b.eval_exact(binding)?;
                if base.is_zero() && exp < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(rat_pow(&base, exp))
            }
            SumExpr::Binomial(a, b) => {
                let av = a.eval_exact(binding)?;
                let bv = b.eval_exact(binding)?;
                let ai = as_i64(&av)
                    .ok_or_else(|| EvalError::NonIntegerArgument("Binomial", rat_to_string(&av)))?;
                let bi = as_i64(&bv)
                    .ok_or_else(|| EvalError::NonIntegerArgument("Binomial", rat_to_string(&bv)))?;
                Ok(binomial_int(ai, bi))
            }
            SumExpr::Pochhammer(a, m) => {
                let mv = m.eval_exact(binding)?;
                let mi = as_i64(&mv).ok_or_else(|| {
                    EvalError::NonIntegerArgument("Pochhammer", rat_to_string(&mv))
                })?;
                Ok(pochhammer(&a.eval_exact(binding)?, mi))
            }
            SumExpr::Factorial(a) => {
                let av = a.eval_exact(binding)?;
                let ai = as_i64(&av)
                    .ok_or_else(|| EvalError::NonIntegerArgument("Factorial", rat_to_string(&av)))?;
                if ai < 0 {
                    return Err(EvalError::NegativeFactorial(ai));
                }
                Ok(crate::rat::factorial(ai))
            }
            SumExpr::Harmonic {
                weights,
                scales,
                upper,
            } => {
                let uv = upper.eval_exact(binding)?;
                let n = as_i64(&uv)
                    .ok_or_else(|| EvalError::NonIntegerArgument("S", rat_to_string(&uv)))?;
                Ok(harmonic_value(weights, scales, n))
            }
            SumExpr::Sum {
                index,
                lower,
                upper,
                body,
            } => quantifier_value(binding, index, lower, upper, body, true),
            SumExpr::Product {
                index,
                lower,
                upper,
                body,
            } => quantifier_value(binding, index, lower, upper, body, false),
        }
    }

    /// Structural substitution param -> param + amount, respecting shadowing.
    pub fn shift_param(&self, param: &str, amount: i64) -> SumExpr {
        if amount == 0 {
            return self.clone();
        }
        let replacement = SumExpr::Add(vec![
            SumExpr::Param(param.to_string()),
            SumExpr::int(amount),
        ]);
        self.subst(param, &replacement)
    }

    /// Structural substitution of a free variable, respecting shadowing.
    pub fn subst(&self, name: &str, value: &SumExpr) -> SumExpr {
        match self {
            SumExpr::Int(_) => self.clone(),
            SumExpr::Param(n) | SumExpr::BoundVar(n) => {
                if n == name {
                    value.clone()
                } else {
                    self.clone()
                }
            }
            SumExpr::Add(ts) => SumExpr::Add(ts.iter().map(|t| t.subst(name, value)).collect()),
            SumExpr::Mul(ts) => SumExpr::Mul(ts.iter().map(|t| t.subst(name, value)).collect()),
            SumExpr::Neg(x) => SumExpr::Neg(Box::new(x.subst(name, value))),
            SumExpr::Div(a, b) => SumExpr::Div(
                Box::new(a.subst(name, value)),
                Box::new(b.subst(name, value)),
            ),
            SumExpr::Pow(a, b) => SumExpr::Pow(
                Box::new(a.subst(name, value)),
                Box::new(b.subst(name, value)),
            ),
            SumExpr::Binomial(a, b) => SumExpr::Binomial(
                Box::new(a.subst(name, value)),
                Box::new(b.subst(name, value)),
            ),
            SumExpr::Pochhammer(a, b) => SumExpr::Pochhammer(
                Box::new(a.subst(name, value)),
                Box::new(b.subst(name, value)),
            ),
            SumExpr::Factorial(a) => SumExpr::Factorial(Box::new(a.subst(name, value))),
            SumExpr::Harmonic {
                weights,
                scales,
                upper,
            } => SumExpr::Harmonic {
                weights: weights.clone(),
                scales: scales.clone(),
                upper: Box::new(upper.subst(name, value)),
            },
            SumExpr::Sum {
                index,
                lower,
                upper,
                body,
            } => {
                let new_upper = match upper {
                    Upper::Finite(u) => Upper::Finite(Box::new(u.subst(name, value))),
                    Upper::Infinity => Upper::Infinity,
                };
                let new_body = if index == name {
                    body.as_ref().clone() // shadowed
                } else {
                    body.subst(name, value)
                };
                SumExpr::Sum {
                    index: index.clone(),
                    lower: Box::new(lower.subst(name, value)),
                    upper: new_upper,
                    body: Box::new(new_body),
                }
            }
            SumExpr::Product {
                index,
                lower,
                upper,
                body,
            } => {
                let new_upper = match upper {
                    Upper::Finite(u) => Upper::Finite(Box::new(u.subst(name, value))),
                    Upper::Infinity => Upper::Infinity,
                };
                let new_body = if index == name {
                    body.as_ref().clone()
                } else {
                    body.subst(name, value)
                };
                SumExpr::Product {
                    index: index.clone(),
                    lower: Box::new(lower.subst(name, value)),
                    upper: new_upper,
                    body: Box::new(new_body),
                }
            }
        }
    }

    /// All free variable names (parameters and unbound indices).
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            SumExpr::Int(_) => {}
            SumExpr::Param(n) | SumExpr::BoundVar(n) => {
                if !bound.contains(n) {
                    out.push(n.clone());
                }
            }
            SumExpr::Add(ts) | SumExpr::Mul(ts) => {
                for t in ts {
                    t.collect_free(bound, out);
                }
            }
            SumExpr::Neg(x) | SumExpr::Factorial(x) => x.collect_free(bound, out),
            SumExpr::Div(a, b)
            | SumExpr::Pow(a, b)
            | SumExpr::Binomial(a, b)
            | SumExpr::Pochhammer(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            SumExpr::Harmonic { upper, .. } => upper.collect_free(bound, out),
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
                lower.collect_free(bound, out);
                if let Upper::Finite(u) = upper {
                    u.collect_free(bound, out);
                }
                bound.push(index.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Canonical text form; `parse` reads it back.
    pub fn render(&self) -> String {
        self.render_prec(0)
    }

    // precedence: 0 add, 1 mul, 2 unary, 3 pow, 4 atom
    fn render_prec(&self, prec: u8) -> String {
        let (s, p) = match self {
            SumExpr::Int(c) => {
                let s = rat_to_string(c);
                let p = if !c.is_integer() {
                    1 // p/q renders as a quotient
                } else if c.is_negative() {
                    2
                } else {
                    4
                };
                (s, p)
            }
            SumExpr::Param(n) | SumExpr::BoundVar(n) => (n.clone(), 4),
            SumExpr::Add(ts) => {
                let mut s = String::new();
                for (i, t) in ts.iter().enumerate() {
                    let r = t.render_prec(1);
                    if i == 0 {
                        s.push_str(&r);
                    } else if let Some(stripped) = r.strip_prefix('-') {
                        s.push_str(" - ");
                        s.push_str(stripped);
                    } else {
                        s.push_str(" + ");
                        s.push_str(&r);
                    }
                }
                (s, 0)
            }
            SumExpr::Mul(ts) => {
                let s: Vec<String> = ts
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let r = t.render_prec(2);
                        // "x*-3" is not valid input syntax
                        if i > 0 && r.starts_with('-') {
                            format!("({})", r)
                        } else {
                            r
                        }
                    })
                    .collect();
                (s.join("*"), 1)
            }
            SumExpr::Neg(x) => (format!("-{}", x.render_prec(1)), 1),
            SumExpr::Div(a, b) => {
                (format!("{}/{}", a.render_prec(2), b.render_prec(3)), 1)
            }
            SumExpr::Pow(a, b) => {
                (format!("{}^{}", a.render_prec(4), b.render_prec(3)), 3)
            }
            SumExpr::Binomial(a, b) => {
                (format!("Binomial[{}, {}]", a.render(), b.render()), 4)
            }
            SumExpr::Pochhammer(a, b) => {
                (format!("Pochhammer[{}, {}]", a.render(), b.render()), 4)
            }
            SumExpr::Factorial(a) => (format!("Factorial[{}]", a.render()), 4),
            SumExpr::Harmonic {
                weights,
                scales,
                upper,
            } => {
                let ws: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
                let all_unit = scales.iter().all(|x| x.is_one());
                let s = if all_unit {
                    format!("S[{}, {}]", ws.join(", "), upper.render())
                } else {
                    let xs: Vec<String> = scales.iter().map(rat_to_string).collect();
                    format!("S[{}, {{{}}}, {}]", ws.join(", "), xs.join(", "), upper.render())
                };
                (s, 4)
            }
            SumExpr::Sum {
                index,
                lower,
                upper,
                body,
            } => (render_quant("Sum", index, lower, upper, body), 4),
            SumExpr::Product {
                index,
                lower,
                upper,
                body,
            } => (render_quant("Product", index, lower, upper, body), 4),
        };
        if p < prec {
            format!("({})", s)
        } else {
            s
        }
    }
}

fn render_quant(head: &str, index: &str, lower: &SumExpr, upper: &Upper, body: &SumExpr) -> String {
    let up = match upper {
        Upper::Finite(u) => u.render(),
        Upper::Infinity => "Infinity".to_string(),
    };
    format!(
        "{}[{}, {{{}, {}, {}}}]",
        head,
        body.render(),
        index,
        lower.render(),
        up
    )
}

impl fmt::Display for SumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// S_{r1,...}(x1,...; n) = sum over n >= k >= 1 of x1^k / k^r1 * S_{r2,...}(x2,...; k).
/// Negative n gives 0 (the empty nest), matching the summation ranges used
/// throughout: these only ever evaluate at n >= 0.
/// Value of the nested power-harmonic sum with the given weights and
/// scales at an integer upper bound (zero on an empty range).
pub fn harmonic_value_at(weights: &[i64], scales: &[BigRat], n: i64) -> BigRat {
    harmonic_value(weights, scales, n)
}

fn harmonic_value(weights: &[i64], scales: &[BigRat], n: i64) -> BigRat {
    if weights.is_empty() {
        return BigRat::one();
    }
    let mut acc = BigRat::zero();
    for k in 1..=n {
        let term = rat_pow(&scales[0], k) / rat_pow(&rat(k), weights[0]);
        acc += term * harmonic_value(&weights[1..], &scales[1..], k);
    }
    acc
}

fn quantifier_value(
    binding: &HashMap<String, BigRat>,
    index: &str,
    lower: &SumExpr,
    upper: &Upper,
    body: &SumExpr,
    additive: bool,
) -> Result<BigRat, EvalError> {
    let lo = lower.eval_exact(binding)?;
    let lo = as_i64(&lo)
        .ok_or_else(|| EvalError::NonIntegerArgument("Sum lower bound", rat_to_string(&lo)))?;
    let up = match upper {
        Upper::Infinity => return Err(EvalError::InfiniteBound),
        Upper::Finite(u) => {
            let v = u.eval_exact(binding)?;
            as_i64(&v).ok_or_else(|| {
                EvalError::NonIntegerArgument("Sum upper bound", rat_to_string(&v))
            })?
        }
    };
    if up < lo - 1 {
        return Err(EvalError::RangeViolation {
            index: index.to_string(),
            lower: lo,
            upper: up,
        });
    }
    let mut acc = if additive { BigRat::zero() } else { BigRat::one() };
    let mut inner = binding.clone();
    for i in lo..=up {
        inner.insert(index.to_string(), rat(i));
        let v = body.eval_exact(&inner)?;
        if additive {
            acc += v;
        } else {
            acc *= v;
        }
    }
    Ok(acc)
}

/// One quantifier layer of a nested sum, outermost first in [`SumSpec`].
/// `weight` is the factor standing between this quantifier and the next
/// inner one (the part of the summand that does not involve deeper indices).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quant {
    pub index: String,
    pub lower: i64,
    pub upper: QuantUpper,
    pub weight: SumExpr,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum QuantUpper {
    Linear(LinForm),
    Infinite,
}

/// A parsed summation problem: quantifier prefix (outermost first, so the
/// innermost quantifier is last), innermost summand, free parameters, and
/// the distinguished recurrence parameter.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SumSpec {
    pub params: Vec<String>,
    pub rec_param: String,
    pub quants: Vec<Quant>,
    pub summand: SumExpr,
    pub start_offsets: HashMap<String, i64>,
}

impl SumSpec {
    /// Rebuild the full expression from the quantifier prefix.
    pub fn to_expr(&self) -> SumExpr {
        let mut acc = self.summand.clone();
        for q in self.quants.iter().rev() {
            let upper = match &q.upper {
                QuantUpper::Linear(l) => Upper::Finite(Box::new(l.to_expr())),
                QuantUpper::Infinite => Upper::Infinity,
            };
            let body = if q.weight == SumExpr::int(1) {
                acc
            } else {
                SumExpr::mul(vec![q.weight.clone(), acc])
            };
            acc = SumExpr::Sum {
                index: q.index.clone(),
                lower: Box::new(SumExpr::int(q.lower)),
                upper,
                body: Box::new(body),
            };
        }
        acc
    }

    pub fn render(&self) -> String {
        self.to_expr().render()
    }

    /// Exact value with each parameter bound to an integer.
    pub fn eval_exact(&self, binding: &HashMap<String, BigRat>) -> Result<BigRat, EvalError> {
        self.to_expr().eval_exact(binding)
    }

    /// Value as a function of the recurrence parameter, other params fixed.
    pub fn eval_at(&self, n: i64) -> Result<BigRat, EvalError> {
        let mut binding = HashMap::new();
        binding.insert(self.rec_param.clone(), rat(n));
        self.eval_exact(&binding)
    }

    /// The spec with one parameter shifted by an integer everywhere.
    pub fn shift_param(&self, param: &str, amount: i64) -> SumSpec {
        let mut out = self.clone();
        out.summand = out.summand.shift_param(param, amount);
        for q in &mut out.quants {
            q.weight = q.weight.shift_param(param, amount);
            if let QuantUpper::Linear(l) = &q.upper {
                let c = l.coeff_of(param);
                if c != 0 {
                    let mut nl = l.clone();
                    nl.constant += c * amount;
                    q.upper = QuantUpper::Linear(nl);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;

    fn bind(pairs: &[(&str, i64)]) -> HashMap<String, BigRat> {
        pairs.iter().map(|&(n, v)| (n.to_string(), rat(v))).collect()
    }

    fn harmonic(upper: SumExpr) -> SumExpr {
        SumExpr::Harmonic {
            weights: vec![1],
            scales: vec![BigRat::one()],
            upper: Box::new(upper),
        }
    }

    #[test]
    fn harmonic_values() {
        let h3 = harmonic(SumExpr::int(3));
        assert_eq!(h3.eval_exact(&bind(&[])).unwrap(), rat_frac(11, 6));
        let h0 = harmonic(SumExpr::int(0));
        assert_eq!(h0.eval_exact(&bind(&[])).unwrap(), rat(0));
        // S[2, {1/2}, 2] = (1/2)/1 + (1/4)/4
        let s = SumExpr::Harmonic {
            weights: vec![2],
            scales: vec![rat_frac(1, 2)],
            upper: Box::new(SumExpr::int(2)),
        };
        assert_eq!(s.eval_exact(&bind(&[])).unwrap(), rat_frac(9, 16));
        // nested: S[1,2,{1,1},2] = sum_{k=1}^{2} 1/k * sum_{i=1}^{k} 1/i^2
        let nested = SumExpr::Harmonic {
            weights: vec![1, 2],
            scales: vec![rat(1), rat(1)],
            upper: Box::new(SumExpr::int(2)),
        };
        assert_eq!(
            nested.eval_exact(&bind(&[])).unwrap(),
            rat(1) + rat_frac(1, 2) * (rat(1) + rat_frac(1, 4))
        );
    }

    #[test]
    fn binomial_harmonic_square_sum() {
        // X(2) = sum_{j=0}^{2} Binomial(2,j) * S1(j)^2 = 17/4
        let body = SumExpr::Mul(vec![
            SumExpr::Binomial(
                Box::new(SumExpr::Param("k".into())),
                Box::new(SumExpr::BoundVar("j".into())),
            ),
            SumExpr::pow_int(harmonic(SumExpr::BoundVar("j".into())), 2),
        ]);
        let x = SumExpr::Sum {
            index: "j".into(),
            lower: Box::new(SumExpr::int(0)),
            upper: Upper::Finite(Box::new(SumExpr::Param("k".into()))),
            body: Box::new(body),
        };
        assert_eq!(x.eval_exact(&bind(&[("k", 2)])).unwrap(), rat_frac(17, 4));
    }

    #[test]
    fn empty_ranges_and_violations() {
        let s = SumExpr::Sum {
            index: "i".into(),
            lower: Box::new(SumExpr::int(0)),
            upper: Upper::Finite(Box::new(SumExpr::int(-1))),
            body: Box::new(SumExpr::int(5)),
        };
        assert_eq!(s.eval_exact(&bind(&[])).unwrap(), rat(0), "empty sum");
        let p = SumExpr::Product {
            index: "i".into(),
            lower: Box::new(SumExpr::int(1)),
            upper: Upper::Finite(Box::new(SumExpr::int(0))),
            body: Box::new(SumExpr::int(5)),
        };
        assert_eq!(p.eval_exact(&bind(&[])).unwrap(), rat(1), "empty product");
        let bad = SumExpr::Sum {
            index: "i".into(),
            lower: Box::new(SumExpr::int(0)),
            upper: Upper::Finite(Box::new(SumExpr::int(-2))),
            body: Box::new(SumExpr::int(5)),
        };
        assert!(matches!(
            bad.eval_exact(&bind(&[])),
            Err(EvalError::RangeViolation { .. })
        ));
        let inf = SumExpr::Sum {
            index: "i".into(),
            lower: Box::new(SumExpr::int(0)),
            upper: Upper::Infinity,
            body: Box::new(SumExpr::int(1)),
        };
        assert_eq!(inf.eval_exact(&bind(&[])), Err(EvalError::InfiniteBound));
    }

    #[test]
    fn shift_param_structure() {
        let e = SumExpr::Binomial(
            Box::new(SumExpr::Param("n".into())),
            Box::new(SumExpr::BoundVar("k".into())),
        );
        let s = e.shift_param("n", 2);
        // value check: C(n+2, k) at n=3, k=2 equals C(5,2)
        assert_eq!(
            s.eval_exact(&bind(&[("n", 3), ("k", 2)])).unwrap(),
            rat(10)
        );
        // shadowing: the bound index is untouched
        let inner = SumExpr::Sum {
            index: "n".into(),
            lower: Box::new(SumExpr::int(0)),
            upper: Upper::Finite(Box::new(SumExpr::Param("m".into()))),
            body: Box::new(SumExpr::BoundVar("n".into())),
        };
        let shifted = inner.shift_param("n", 5);
        assert_eq!(shifted, inner, "bound occurrences are shadowed");
    }

    #[test]
    fn evaluation_errors() {
        let div = SumExpr::Div(Box::new(SumExpr::int(1)), Box::new(SumExpr::int(0)));
        assert_eq!(div.eval_exact(&bind(&[])), Err(EvalError::DivisionByZero));
        let pw = SumExpr::Pow(
            Box::new(SumExpr::int(2)),
            Box::new(SumExpr::Int(rat_frac(1, 2))),
        );
        assert!(matches!(
            pw.eval_exact(&bind(&[])),
            Err(EvalError::NonIntegerExponent(_))
        ));
        let unb = SumExpr::Param("q".into());
        assert_eq!(
            unb.eval_exact(&bind(&[])),
            Err(EvalError::Unbound("q".into()))
        );
    }

    #[test]
    fn render_roundtrip_values() {
        let e = SumExpr::Add(vec![
            SumExpr::Mul(vec![
                SumExpr::int(2),
                SumExpr::Pow(
                    Box::new(SumExpr::Param("n".into())),
                    Box::new(SumExpr::int(3)),
                ),
            ]),
            SumExpr::Neg(Box::new(SumExpr::Div(
                Box::new(SumExpr::int(1)),
                Box::new(SumExpr::Add(vec![
                    SumExpr::Param("n".into()),
                    SumExpr::int(1),
                ])),
            ))),
        ]);
        let text = e.render();
        assert_eq!(text, "2*n^3 - 1/(n + 1)");
    }
}
