//! Integer-linear forms: expressions of the shape c0 + c1*v1 + ... + cr*vr
//! with integer coefficients. Summation bounds, shift amounts, and admissible
//! exponents all live here, so extraction from and rebuilding into syntax
//! trees is centralized in this module.

use super::SumExpr;
use crate::rat::{as_i64, rat, BigRat};
use std::collections::BTreeMap;
use std::fmt;

/// c0 + sum of c_v * v over named variables, all coefficients integers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinForm {
    pub constant: i64,
    pub coeffs: BTreeMap<String, i64>,
}

impl LinForm {
    pub fn constant(c: i64) -> Self {
        LinForm {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), 1);
        LinForm {
            constant: 0,
            coeffs,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_constant(&self) -> Option<i64> {
        if self.is_constant() {
            Some(self.constant)
        } else {
            None
        }
    }

    pub fn coeff_of(&self, name: &str) -> i64 {
        self.coeffs.get(name).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &LinForm) -> LinForm {
        let mut out = self.clone();
        out.constant += other.constant;
        for (v, c) in &other.coeffs {
            let e = out.coeffs.entry(v.clone()).or_insert(0);
            *e += c;
            if *e == 0 {
                out.coeffs.remove(v);
            }
        }
        out
    }

    pub fn sub(&self, other: &LinForm) -> LinForm {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> LinForm {
        if k == 0 {
            return LinForm::constant(0);
        }
        LinForm {
            constant: self.constant * k,
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * k))
                .collect(),
        }
    }

    pub fn add_const(&self, k: i64) -> LinForm {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    /// Substitute a linear form for one variable.
    pub fn subst(&self, name: &str, value: &LinForm) -> LinForm {
        let c = self.coeff_of(name);
        if c == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        out.coeffs.remove(name);
        out.add(&value.scale(c))
    }

    /// Evaluate with every variable bound.
    pub fn eval(&self, binding: &std::collections::HashMap<String, BigRat>) -> Option<BigRat> {
        let mut acc = rat(self.constant);
        for (v, c) in &self.coeffs {
            acc += binding.get(v)? * rat(*c);
        }
        Some(acc)
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn to_expr(&self) -> SumExpr {
        let mut terms: Vec<SumExpr> = Vec::new();
        for (v, &c) in &self.coeffs {
            let var = SumExpr::Param(v.clone());
            terms.push(match c {
                1 => var,
                -1 => SumExpr::Neg(Box::new(var)),
                _ => SumExpr::Mul(vec![SumExpr::Int(rat(c)), var]),
            });
        }
        if self.constant != 0 || terms.is_empty() {
            terms.push(SumExpr::Int(rat(self.constant)));
        }
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            SumExpr::Add(terms)
        }
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, &c) in &self.coeffs {
            if first {
                match c {
                    1 => write!(f, "{}", v)?,
                    -1 => write!(f, "-{}", v)?,
                    _ => write!(f, "{}*{}", c, v)?,
                }
                first = false;
            } else if c >= 0 {
                if c == 1 {
                    write!(f, "+{}", v)?;
                } else {
                    write!(f, "+{}*{}", c, v)?;
                }
            } else if c == -1 {
                write!(f, "-{}", v)?;
            } else {
                write!(f, "{}*{}", c, v)?;
            }
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if self.constant > 0 {
            write!(f, "+{}", self.constant)?;
        } else if self.constant < 0 {
            write!(f, "{}", self.constant)?;
        }
        Ok(())
    }
}

/// Extract an integer-linear form from an expression; `None` when the
/// expression is not integer-linear in its variables.
pub fn expr_to_linform(e: &SumExpr) -> Option<LinForm> {
    match e {
        SumExpr::Int(c) => {
            let v = as_i64(c)?;
            Some(LinForm::constant(v))
        }
        SumExpr::Param(v) | SumExpr::BoundVar(v) => Some(LinForm::var(v)),
        SumExpr::Add(ts) => {
            let mut acc = LinForm::constant(0);
            for t in ts {
                acc = acc.add(&expr_to_linform(t)?);
            }
            Some(acc)
        }
        SumExpr::Neg(x) => Some(expr_to_linform(x)?.scale(-1)),
        SumExpr::Mul(fs) => {
            // exactly one non-constant factor is allowed
            let mut k: i64 = 1;
            let mut lin: Option<LinForm> = None;
            for fct in fs {
                let l = expr_to_linform(fct)?;
                if let Some(c) = l.as_constant() {
                    k = k.checked_mul(c)?;
                } else if lin.is_none() {
                    lin = Some(l);
                } else {
                    return None; // product of two variables
                }
            }
            Some(match lin {
                Some(l) => l.scale(k),
                None => LinForm::constant(k),
            })
        }
        SumExpr::Div(a, b) => {
            let la = expr_to_linform(a)?;
            let lb = expr_to_linform(b)?;
            let d = lb.as_constant()?;
            if d == 0 {
                return None;
            }
            // require exact divisibility of all coefficients
            if la.constant % d != 0 || la.coeffs.values().any(|c| c % d != 0) {
                return None;
            }
            let mut out = LinForm::constant(la.constant / d);
            for (v, c) in &la.coeffs {
                out.coeffs.insert(v.clone(), c / d);
            }
            Some(out)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extraction() {
        // 2n - k + 3
        let e = SumExpr::Add(vec![
            SumExpr::Mul(vec![SumExpr::Int(rat(2)), SumExpr::Param("n".into())]),
            SumExpr::Neg(Box::new(SumExpr::Param("k".into()))),
            SumExpr::Int(rat(3)),
        ]);
        let l = expr_to_linform(&e).unwrap();
        assert_eq!(l.constant, 3);
        assert_eq!(l.coeff_of("n"), 2);
        assert_eq!(l.coeff_of("k"), -1);
        // rebuild and re-extract
        let l2 = expr_to_linform(&l.to_expr()).unwrap();
        assert_eq!(l, l2);
    }

    #[test]
    fn rejects_nonlinear() {
        let e = SumExpr::Mul(vec![
            SumExpr::Param("n".into()),
            SumExpr::Param("k".into()),
        ]);
        assert!(expr_to_linform(&e).is_none());
        let d = SumExpr::Div(
            Box::new(SumExpr::Param("n".into())),
            Box::new(SumExpr::Int(rat(2))),
        );
        assert!(expr_to_linform(&d).is_none(), "n/2 is not integer-linear");
    }

    #[test]
    fn substitution() {
        // n + 2k with k := n - 1  gives  3n - 2
        let l = LinForm::var("n").add(&LinForm::var("k").scale(2));
        let r = l.subst("k", &LinForm::var("n").add_const(-1));
        assert_eq!(r.coeff_of("n"), 3);
        assert_eq!(r.constant, -2);
        assert_eq!(r.coeff_of("k"), 0);
    }
}
