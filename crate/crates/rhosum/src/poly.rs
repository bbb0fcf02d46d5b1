//! Univariate polynomials and rational functions over the parameter field.
//!
//! `UniPoly` is a dense polynomial in one distinguished variable (written t)
//! whose coefficients are `ParamRat` values, i.e. elements of K = Q(params).
//! `RatFun` is the quotient field K(t) in canonical form: numerator and
//! denominator coprime with a monic denominator. The shift t -> t+1 acts on
//! both and is the automorphism every difference ring in this crate is built
//! on.
//!
//! Beyond ring/field arithmetic this module provides the shift-aware tools
//! the solvers need: gcd, resultants with respect to an auxiliary integer
//! shift of one argument, certified integer root extraction (specialize,
//! isolate with Sturm chains, verify symbolically), and the dispersion of a
//! pair of polynomials: the largest integer shift that makes them share a
//! factor.

use crate::param::{ParamId, ParamPoly, ParamRat};
use crate::rat::{rat, rat_int, BigRat};
use num::bigint::BigInt;
use num::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;

/// Dense univariate polynomial over K. Coefficient i belongs to t^i; the
/// vector never has trailing zeros and the zero polynomial is the empty
/// vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct UniPoly {
    c: Vec<ParamRat>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<ParamRat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { c: coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        UniPoly::constant(ParamRat::one())
    }

    pub fn constant(c: ParamRat) -> Self {
        if c.is_zero() {
            UniPoly::zero()
        } else {
            UniPoly { c: vec![c] }
        }
    }

    pub fn from_int(n: i64) -> Self {
        UniPoly::constant(ParamRat::from_int(n))
    }

    /// The variable t itself.
    pub fn var() -> Self {
        UniPoly {
            c: vec![ParamRat::zero(), ParamRat::one()],
        }
    }

    /// t + c for a machine integer c.
    pub fn var_plus(c: i64) -> Self {
        UniPoly::var().add(&UniPoly::from_int(c))
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    /// Degree as an integer with deg 0 = -1 for the zero polynomial.
    pub fn degree_i(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn coeff(&self, i: usize) -> ParamRat {
        self.c.get(i).cloned().unwrap_or_else(ParamRat::zero)
    }

    pub fn coeffs(&self) -> &[ParamRat] {
        &self.c
    }

    pub fn leading_coeff(&self) -> ParamRat {
        self.c.last().cloned().unwrap_or_else(ParamRat::zero)
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.c.len().max(other.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).add(&other.coeff(i)));
        }
        UniPoly::new(out)
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly {
            c: self.c.iter().map(|x| x.neg()).collect(),
        }
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![ParamRat::zero(); self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        UniPoly::new(out)
    }

    pub fn scale(&self, k: &ParamRat) -> UniPoly {
        if k.is_zero() {
            return UniPoly::zero();
        }
        UniPoly {
            c: self.c.iter().map(|x| x.mul(k)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> UniPoly {
        let mut acc = UniPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiply by t^k.
    pub fn mul_xk(&self, k: usize) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![ParamRat::zero(); k];
        out.extend(self.c.iter().cloned());
        UniPoly { c: out }
    }

    /// Quotient and remainder; coefficients form a field so this is exact
    /// polynomial division.
    pub fn divrem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let lc = d.leading_coeff();
        let mut rem = self.c.clone();
        if rem.len() <= dd {
            return (UniPoly::zero(), self.clone());
        }
        let qlen = rem.len() - dd;
        let mut quo = vec![ParamRat::zero(); qlen];
        for k in (dd..rem.len()).rev() {
            let coef = rem[k].div(&lc);
            if !coef.is_zero() {
                quo[k - dd] = coef.clone();
                for i in 0..=dd {
                    let t = d.coeff(i).mul(&coef);
                    rem[k - dd + i] = rem[k - dd + i].sub(&t);
                }
            }
        }
        (UniPoly::new(quo), UniPoly::new(rem))
    }

    pub fn rem(&self, d: &UniPoly) -> UniPoly {
        self.divrem(d).1
    }

    /// Exact division; panics if the division leaves a remainder.
    pub fn exact_div(&self, d: &UniPoly) -> UniPoly {
        let (q, r) = self.divrem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic greatest common divisor; gcd(p, 0) is the monic multiple of p.
    ///
    /// With parameters present, one nondegenerate specialization gives a
    /// certified upper bound on the gcd degree: a common factor keeps its
    /// degree under any binding that preserves both leading coefficients.
    /// A constant specialized gcd therefore proves coprimality outright,
    /// and otherwise the Euclidean remainder whose degree first matches the
    /// bound is checked by exact division, falling back to the plain
    /// remainder sequence when the bound was not attained.
    pub fn gcd(a: &UniPoly, b: &UniPoly) -> UniPoly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        let parametric = a
            .coeffs()
            .iter()
            .chain(b.coeffs())
            .any(|c| !c.vars().is_empty());
        let mut target: Option<usize> = None;
        if parametric {
            let (sa, sb) = specialize_pair_keeping_degrees(a, b);
            let d = Self::gcd_euclid(&sa, &sb).degree().unwrap();
            if d == 0 {
                return UniPoly::one();
            }
            target = Some(d);
        }
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            if target.is_some() && target == y.degree() {
                let cand = y.monic();
                if a.rem(&cand).is_zero() && b.rem(&cand).is_zero() {
                    return cand;
                }
                target = None;
            }
            let r = x.rem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }

    fn gcd_euclid(a: &UniPoly, b: &UniPoly) -> UniPoly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let r = x.rem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }

    pub fn lcm(a: &UniPoly, b: &UniPoly) -> UniPoly {
        if a.is_zero() || b.is_zero() {
            return UniPoly::zero();
        }
        let g = UniPoly::gcd(a, b);
        a.mul(b).exact_div(&g).monic()
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let lc = self.leading_coeff();
        self.scale(&lc.recip())
    }

    /// p(t + j) for an integer j: the shift automorphism applied j times.
    pub fn shift(&self, j: i64) -> UniPoly {
        if j == 0 || self.is_zero() {
            return self.clone();
        }
        // Horner: p(t+j) built from the top coefficient down.
        let step = UniPoly::var_plus(j);
        let mut acc = UniPoly::zero();
        for c in self.c.iter().rev() {
            acc = acc.mul(&step).add(&UniPoly::constant(c.clone()));
        }
        acc
    }

    /// Formal derivative with respect to t.
    pub fn derivative(&self) -> UniPoly {
        if self.c.len() <= 1 {
            return UniPoly::zero();
        }
        let mut out = Vec::with_capacity(self.c.len() - 1);
        for (i, c) in self.c.iter().enumerate().skip(1) {
            out.push(c.scale(&rat(i as i64)));
        }
        UniPoly::new(out)
    }

    pub fn eval(&self, x: &ParamRat) -> ParamRat {
        let mut acc = ParamRat::zero();
        for c in self.c.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn eval_int(&self, x: i64) -> ParamRat {
        self.eval(&ParamRat::from_int(x))
    }

    pub fn eval_rat(&self, x: &BigRat) -> ParamRat {
        self.eval(&ParamRat::constant(x.clone()))
    }

    /// Substitute numeric values for all parameters inside the coefficients,
    /// leaving a polynomial in t with constant coefficients. `None` if a
    /// coefficient denominator vanishes at the binding.
    pub fn specialize(&self, binding: &HashMap<ParamId, BigRat>) -> Option<UniPoly> {
        let mut out = Vec::with_capacity(self.c.len());
        for c in &self.c {
            out.push(ParamRat::constant(c.eval(binding)?));
        }
        Some(UniPoly::new(out))
    }

    /// Render with a chosen variable name.
    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = format!("{}", c);
            let needs_paren = cs.contains('+') || (cs.contains('-') && !cs.starts_with('-')) || cs[1..].contains('-');
            let cs = if needs_paren && i > 0 { format!("({})", cs) } else { cs };
            let term = match i {
                0 => cs,
                1 if cs == "1" => var.to_string(),
                1 => format!("{}*{}", cs, var),
                _ if cs == "1" => format!("{}^{}", var, i),
                _ => format!("{}*{}^{}", cs, var, i),
            };
            parts.push(term);
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_in("t"))
    }
}

/// The scalar resultant Res_t(p, q): up to sign the product of root
/// differences; zero exactly when p and q share a root.
pub fn scalar_resultant(p: &UniPoly, q: &UniPoly) -> ParamRat {
    if p.is_zero() || q.is_zero() {
        return ParamRat::zero();
    }
    fn go(a: &UniPoly, b: &UniPoly) -> ParamRat {
        let m = a.degree().unwrap();
        let n = b.degree().unwrap();
        if n == 0 {
            return b.leading_coeff().pow(m as i64);
        }
        if m < n {
            let sign = if (m * n) % 2 == 1 { -1 } else { 1 };
            return go(b, a).scale(&rat(sign));
        }
        let r = a.rem(b);
        if r.is_zero() {
            return ParamRat::zero();
        }
        let dr = r.degree().unwrap();
        let sign = if (m * n) % 2 == 1 { -1 } else { 1 };
        b.leading_coeff()
            .pow((m - dr) as i64)
            .mul(&go(b, &r))
            .scale(&rat(sign))
    }
    go(p, q)
}

/// The resultant of p(t) and q(t+j) as a polynomial in the auxiliary shift
/// variable j, computed by evaluation at integer shifts and interpolation.
/// Evaluating it at j = 0 gives the scalar resultant of p and q; its integer
/// roots are the shifts at which p and q share a factor.
pub fn resultant(p: &UniPoly, q: &UniPoly) -> UniPoly {
    if p.is_zero() || q.is_zero() {
        return UniPoly::zero();
    }
    let dp = p.degree().unwrap();
    let dq = q.degree().unwrap();
    let bound = dp * dq; // deg_j Res_t(p(t), q(t+j)) <= deg p * deg q
    let mut points = Vec::with_capacity(bound + 1);
    for j in 0..=(bound as i64) {
        points.push((rat(j), scalar_resultant(p, &q.shift(j))));
    }
    interpolate(&points)
}

/// Lagrange interpolation through distinct rational nodes.
pub fn interpolate(points: &[(BigRat, ParamRat)]) -> UniPoly {
    let mut acc = UniPoly::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = UniPoly::one();
        let mut denom = BigRat::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&UniPoly::new(vec![
                ParamRat::constant(-xj.clone()),
                ParamRat::one(),
            ]));
            denom *= xi - xj;
        }
        let w = yi.scale(&denom.recip());
        acc = acc.add(&basis.scale(&w));
    }
    acc
}

/// All integer roots of a nonzero polynomial, certified: candidates are found
/// on a parameter specialization with Sturm-chain isolation, then verified
/// symbolically against the original coefficients. Sorted ascending.
pub fn integer_roots(p: &UniPoly) -> Vec<BigInt> {
    assert!(!p.is_zero(), "integer roots of the zero polynomial");
    if p.degree() == Some(0) {
        return Vec::new();
    }
    // Clear coefficient denominators so specialization is a ring map.
    let mut den = ParamPoly::one();
    for c in p.coeffs() {
        let g = ParamPoly::gcd(&den, c.den());
        den = den.mul(&c.den().exact_div(&g).expect("gcd divides"));
    }
    let cleared = UniPoly::new(
        p.coeffs()
            .iter()
            .map(|c| c.mul(&ParamRat::from_poly(den.clone())))
            .collect(),
    );
    debug_assert!(cleared.coeffs().iter().all(|c| c.is_polynomial()));

    let spec = specialize_keeping_degree(&cleared);
    let candidates = integer_roots_numeric(&spec);
    let mut out: Vec<BigInt> = candidates
        .into_iter()
        .filter(|r| p.eval(&ParamRat::constant(rat_int(r.clone()))).is_zero())
        .collect();
    out.sort();
    out.dedup();
    out
}

// Bind all parameters to small positive integers such that the leading
// coefficient survives; grid enumeration guarantees termination because a
// nonzero polynomial cannot vanish on a full grid wider than its degree.
fn specialize_keeping_degree(p: &UniPoly) -> UniPoly {
    let mut vars: Vec<ParamId> = Vec::new();
    for c in p.coeffs() {
        for v in c.vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    if vars.is_empty() {
        return p.clone();
    }
    let lead = p.leading_coeff();
    let width = (lead.num().total_degree() + 2) as u64;
    let mut attempt: u64 = 0;
    loop {
        let mut binding = HashMap::new();
        let mut a = attempt;
        for &v in &vars {
            let digit = a % width;
            a /= width;
            binding.insert(v, rat((2 + digit) as i64));
        }
        if let Some(sp) = p.specialize(&binding) {
            if sp.degree() == p.degree() {
                return sp;
            }
        }
        attempt += 1;
        assert!(
            attempt < 1_000_000,
            "no nondegenerate parameter specialization found"
        );
    }
}

// Integer roots of a polynomial with constant rational coefficients.
fn integer_roots_numeric(p: &UniPoly) -> Vec<BigInt> {
    let consts: Vec<BigRat> = p
        .coeffs()
        .iter()
        .map(|c| c.as_constant().expect("constant coefficients"))
        .collect();
    // Scale to integers.
    let mut den = BigInt::one();
    for c in &consts {
        let g = num::integer::gcd(den.clone(), c.denom().clone());
        den = den * c.denom() / g;
    }
    let ints: Vec<BigInt> = consts.iter().map(|c| (c * rat_int(den.clone())).to_integer()).collect();

    // Strip powers of the variable; j = 0 is then a root.
    let v = ints.iter().position(|c| !c.is_zero()).unwrap();
    let zero_root = v > 0;
    let mut out = Vec::new();
    let poly = UniPoly::new(
        ints[v..]
            .iter()
            .map(|c| ParamRat::constant(rat_int(c.clone())))
            .collect(),
    );
    if poly.degree() == Some(0) {
        if zero_root {
            out.push(BigInt::zero());
        }
        return out;
    }
    // Squarefree part keeps every root once and keeps Sturm honest.
    let sf = poly.exact_div(&UniPoly::gcd(&poly, &poly.derivative()));

    // Cauchy bound on root magnitude.
    let lead = sf.leading_coeff().as_constant().unwrap().abs();
    let mut maxq = BigRat::zero();
    for c in sf.coeffs().iter().take(sf.coeffs().len() - 1) {
        let q = c.as_constant().unwrap().abs() / lead.clone();
        if q > maxq {
            maxq = q;
        }
    }
    let bound = maxq + BigRat::one();

    let chain = sturm_chain(&sf);
    let lo = -bound.clone() - BigRat::one();
    let hi = bound + BigRat::one();
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        let roots = sturm_count(&chain, &a) - sturm_count(&chain, &b);
        if roots == 0 {
            continue;
        }
        if &b - &a < BigRat::one() {
            // At most one integer can live in (a, b].
            let fa = a.floor() + BigRat::one(); // smallest integer > a
            if fa <= b {
                out.push(fa.to_integer());
            }
            continue;
        }
        let mid = (&a + &b) / rat(2);
        stack.push((a, mid.clone()));
        stack.push((mid, b));
    }
    // Only exact roots survive.
    out.retain(|r| {
        poly.eval(&ParamRat::constant(rat_int(r.clone()))).is_zero()
    });
    if zero_root {
        out.push(BigInt::zero());
    }
    out.sort();
    out.dedup();
    out
}

fn sturm_chain(p: &UniPoly) -> Vec<UniPoly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            return chain;
        }
        let r = chain[n - 2].rem(&chain[n - 1]).neg();
        if r.is_zero() {
            return chain;
        }
        chain.push(r);
    }
}

fn sturm_count(chain: &[UniPoly], x: &BigRat) -> usize {
    let mut signs = Vec::new();
    for p in chain {
        let v = p.eval(&ParamRat::constant(x.clone())).as_constant().unwrap();
        if !v.is_zero() {
            signs.push(v.is_positive());
        }
    }
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Every shift h >= 0 at which p(t) and q(t+h) share a nontrivial factor,
/// ascending. Empty when no such shift exists.
///
/// Candidate shifts come from the resultant of a single parameter
/// specialization rather than the fully symbolic one: if g divides both p
/// and q(t+h), any binding that keeps the leading coefficients of p and q
/// nonzero also keeps the leading coefficient of g nonzero, so the numeric
/// root set is a superset of the true dispersion set. Each candidate is then
/// verified against the exact coefficients.
pub fn dispersion_set(p: &UniPoly, q: &UniPoly) -> Vec<u64> {
    assert!(!p.is_zero() && !q.is_zero(), "dispersion of zero polynomial");
    if p.degree() == Some(0) || q.degree() == Some(0) {
        return Vec::new();
    }
    let (ps, qs) = specialize_pair_keeping_degrees(p, q);
    let res = resultant(&ps, &qs);
    assert!(!res.is_zero(), "shift resultant cannot vanish identically");
    let mut out = Vec::new();
    for r in integer_roots(&res) {
        if r.is_negative() {
            continue;
        }
        use num::ToPrimitive;
        let h = r.to_i64().expect("shift fits in machine integer");
        let g = UniPoly::gcd(p, &q.shift(h));
        if g.degree().map_or(false, |d| d > 0) {
            out.push(h as u64);
        }
    }
    out
}

// Bind all parameters of both polynomials at a shared grid point such that
// neither leading coefficient vanishes; see specialize_keeping_degree.
fn specialize_pair_keeping_degrees(p: &UniPoly, q: &UniPoly) -> (UniPoly, UniPoly) {
    let mut vars: Vec<ParamId> = Vec::new();
    for c in p.coeffs().iter().chain(q.coeffs()) {
        for v in c.vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    if vars.is_empty() {
        return (p.clone(), q.clone());
    }
    let width =
        (p.leading_coeff().num().total_degree() + q.leading_coeff().num().total_degree() + 2) as u64;
    let mut attempt: u64 = 0;
    loop {
        let mut binding = HashMap::new();
        let mut a = attempt;
        for &v in &vars {
            let digit = a % width;
            a /= width;
            binding.insert(v, rat((2 + digit) as i64));
        }
        if let (Some(sp), Some(sq)) = (p.specialize(&binding), q.specialize(&binding)) {
            if sp.degree() == p.degree() && sq.degree() == q.degree() {
                return (sp, sq);
            }
        }
        attempt += 1;
        assert!(
            attempt < 1_000_000,
            "no nondegenerate parameter specialization found"
        );
    }
}

/// The dispersion: the largest j >= 0 with deg gcd(p(t), q(t+j)) > 0, or -1
/// when no shift aligns them.
pub fn dispersion(p: &UniPoly, q: &UniPoly) -> i64 {
    dispersion_set(p, q)
        .last()
        .map(|&h| h as i64)
        .unwrap_or(-1)
}

/// Solve sigma(w)/w = r for a rational function w, where sigma(w)(t) =
/// w(t+1). Returns None when no rational solution exists (in particular for
/// constant r != 1, since the shift quotient of a rational function always
/// has matching leading behavior).
///
/// Factors of the numerator and denominator of r are paired along shift
/// orbits: a piece g(t)/g(t-j) of r contributes g(t-1)...g(t-j) to w, and a
/// piece g(t)/g(t+j) contributes 1/(g(t)...g(t+j-1)). Whatever cannot be
/// paired rules out a solution, and an exact verification guards the result.
pub fn sigma_quotient_solve(r: &RatFun) -> Option<RatFun> {
    if r.is_zero() {
        return None;
    }
    let mut num = r.num().clone();
    let mut den = r.den().clone();
    let mut w = RatFun::one();
    loop {
        if num.degree() == Some(0) && den.degree() == Some(0) {
            break;
        }
        // shifts j (in either direction) with gcd(num(t), den(t+j)) != 1
        let mut found = None;
        if num.degree().map_or(false, |d| d > 0) && den.degree().map_or(false, |d| d > 0) {
            for h in dispersion_set(&num, &den) {
                let g = UniPoly::gcd(&num, &den.shift(h as i64));
                if g.degree().map_or(false, |d| d > 0) {
                    found = Some((h as i64, g));
                    break;
                }
            }
            if found.is_none() {
                for h in dispersion_set(&den, &num) {
                    if h == 0 {
                        continue; // coprime at shift 0
                    }
                    let g = UniPoly::gcd(&num, &den.shift(-(h as i64)));
                    if g.degree().map_or(false, |d| d > 0) {
                        found = Some((-(h as i64), g));
                        break;
                    }
                }
            }
        }
        let Some((j, g)) = found else {
            return None; // unpaired nonconstant factors remain
        };
        num = num.exact_div(&g);
        den = den.exact_div(&g.shift(-j));
        if j >= 1 {
            for i in 1..=j {
                w = w.mul(&RatFun::from_poly(g.shift(-i)));
            }
        } else {
            for i in 0..(-j) {
                w = w.div(&RatFun::from_poly(g.shift(i)));
            }
        }
    }
    // exact check also rejects a leftover constant mismatch
    if w.shift(1).div(&w) == *r {
        Some(w)
    } else {
        None
    }
}

/// Rational function in t over K, canonical: numerator and denominator
/// coprime, denominator monic. The zero element is 0/1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFun {
    num: UniPoly,
    den: UniPoly,
}

impl RatFun {
    pub fn new(num: UniPoly, den: UniPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let g = UniPoly::gcd(&num, &den);
        let (mut num, mut den) = if g.degree().map_or(false, |d| d > 0) {
            (num.exact_div(&g), den.exact_div(&g))
        } else {
            (num, den)
        };
        let lc = den.leading_coeff();
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        if num.is_zero() {
            den = UniPoly::one();
        }
        RatFun { num, den }
    }

    pub fn zero() -> Self {
        RatFun {
            num: UniPoly::zero(),
            den: UniPoly::one(),
        }
    }

    pub fn one() -> Self {
        RatFun {
            num: UniPoly::one(),
            den: UniPoly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        RatFun {
            num: UniPoly::from_int(n),
            den: UniPoly::one(),
        }
    }

    pub fn from_poly(p: UniPoly) -> Self {
        RatFun {
            num: p,
            den: UniPoly::one(),
        }
    }

    pub fn from_const(c: ParamRat) -> Self {
        RatFun {
            num: UniPoly::constant(c),
            den: UniPoly::one(),
        }
    }

    pub fn var() -> Self {
        RatFun::from_poly(UniPoly::var())
    }

    pub fn num(&self) -> &UniPoly {
        &self.num
    }

    pub fn den(&self) -> &UniPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == UniPoly::one() && self.den == UniPoly::one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den == UniPoly::one()
    }

    /// The constant value in K, if t does not occur.
    pub fn as_const(&self) -> Option<ParamRat> {
        if self.den == UniPoly::one() {
            if self.num.is_zero() {
                return Some(ParamRat::zero());
            }
            if self.num.degree() == Some(0) {
                return Some(self.num.coeff(0));
            }
        }
        None
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        RatFun::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFun) -> RatFun {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        RatFun::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &RatFun) -> RatFun {
        assert!(!other.is_zero(), "division by zero");
        RatFun::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> RatFun {
        assert!(!self.is_zero(), "reciprocal of zero");
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i64) -> RatFun {
        let base = if e < 0 { self.recip() } else { self.clone() };
        let mut acc = RatFun::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn scale(&self, c: &ParamRat) -> RatFun {
        if c.is_zero() {
            return RatFun::zero();
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// The shift automorphism applied j times (j may be negative).
    pub fn shift(&self, j: i64) -> RatFun {
        if j == 0 {
            return self.clone();
        }
        RatFun {
            num: self.num.shift(j),
            den: self.den.shift(j), // stays monic and coprime under shift
        }
    }

    /// Value at t = x; `None` at a pole.
    pub fn eval(&self, x: &ParamRat) -> Option<ParamRat> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x).div(&d))
    }

    pub fn eval_int(&self, x: i64) -> Option<ParamRat> {
        self.eval(&ParamRat::from_int(x))
    }

    /// Fully numeric value with t = x and all parameters bound.
    pub fn eval_full(&self, x: i64, binding: &HashMap<ParamId, BigRat>) -> Option<BigRat> {
        let sx = ParamRat::from_int(x);
        let d = self.den.eval(&sx).eval(binding)?;
        if d.is_zero() {
            return None;
        }
        let n = self.num.eval(&sx).eval(binding)?;
        Some(n / d)
    }

    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_polynomial() {
            return self.num.to_string_in(var);
        }
        let n = self.num.to_string_in(var);
        let d = self.den.to_string_in(var);
        let n = if self.num.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 {
            format!("({})", n)
        } else {
            n
        };
        let d = if self.den.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 || self.den.degree() > Some(0) {
            format!("({})", d)
        } else {
            d
        };
        format!("{}/{}", n, d)
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_in("t"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;

    fn t() -> UniPoly {
        UniPoly::var()
    }

    #[test]
    fn sigma_quotient_solutions() {
        // sigma(w)/w = (t+1)/t has w = t
        let r = RatFun::new(UniPoly::var_plus(1), t());
        assert_eq!(sigma_quotient_solve(&r), Some(RatFun::from_poly(t())));
        // the reciprocal direction: w = 1/t
        let r = RatFun::new(t(), UniPoly::var_plus(1));
        assert_eq!(
            sigma_quotient_solve(&r),
            Some(RatFun::one().div(&RatFun::from_poly(t())))
        );
        // w = t(t+2): sigma(w)/w = (t+1)(t+3)/(t(t+2))
        let w = RatFun::from_poly(t().mul(&UniPoly::var_plus(2)));
        let r = w.shift(1).div(&w);
        assert_eq!(sigma_quotient_solve(&r), Some(w));
        // trivial and unsolvable cases
        assert_eq!(sigma_quotient_solve(&RatFun::one()), Some(RatFun::one()));
        assert_eq!(sigma_quotient_solve(&RatFun::from_int(4)), None);
        assert_eq!(sigma_quotient_solve(&RatFun::from_poly(t())), None);
        // binomial-style ratio (n - t)/(t + 1) is not a shift quotient
        let nm = UniPoly::new(vec![ParamRat::var("n"), ParamRat::from_int(-1)]);
        let r = RatFun::new(nm, UniPoly::var_plus(1));
        assert_eq!(sigma_quotient_solve(&r), None);
        // scaled shift quotient: constant factor obstructs
        let r2 = RatFun::new(UniPoly::var_plus(1), t()).scale(&ParamRat::from_int(3));
        assert_eq!(sigma_quotient_solve(&r2), None);
    }

    #[test]
    fn shift_expands_binomially() {
        // shift(t^2, 1) = t^2 + 2t + 1
        let p = t().mul(&t());
        let s = p.shift(1);
        let expect = UniPoly::new(vec![
            ParamRat::from_int(1),
            ParamRat::from_int(2),
            ParamRat::from_int(1),
        ]);
        assert_eq!(s, expect);
        // shift is invertible
        assert_eq!(s.shift(-1), p);
    }

    #[test]
    fn gcd_examples() {
        // gcd(t^2-1, t-1) = t-1
        let p = t().mul(&t()).sub(&UniPoly::one());
        let q = t().sub(&UniPoly::one());
        assert_eq!(UniPoly::gcd(&p, &q), q);
        // gcd with zero: monic multiple of the other argument
        let r = t().scale(&ParamRat::from_int(3));
        assert_eq!(UniPoly::gcd(&r, &UniPoly::zero()), t());
    }

    #[test]
    fn divrem_roundtrip() {
        let p = t().pow(3).add(&t().scale(&ParamRat::from_int(2))).add(&UniPoly::one());
        let d = t().add(&UniPoly::from_int(4));
        let (q, r) = p.divrem(&d);
        assert_eq!(q.mul(&d).add(&r), p);
        assert!(r.degree() < d.degree());
    }

    #[test]
    fn resultants() {
        // resultant(t-a, t-b) at shift 0 is a-b
        let a = ParamRat::var("pa");
        let b = ParamRat::var("pb");
        let p = t().sub(&UniPoly::constant(a.clone()));
        let q = t().sub(&UniPoly::constant(b.clone()));
        let r = resultant(&p, &q);
        // r(j) = a - b + j, so r(0) = a - b
        assert_eq!(r.eval_int(0), a.sub(&b));
        // resultant(p, 1) = 1
        let r1 = resultant(&p, &UniPoly::one());
        assert_eq!(r1, UniPoly::one());
        // shared root: resultant vanishes at j = 0
        let r2 = resultant(&p, &p);
        assert!(r2.eval_int(0).is_zero());
    }

    #[test]
    fn integer_root_extraction() {
        // (t-3)(t+5)t has roots {-5, 0, 3}
        let p = t()
            .sub(&UniPoly::from_int(3))
            .mul(&t().add(&UniPoly::from_int(5)))
            .mul(&t());
        let roots = integer_roots(&p);
        let expect: Vec<BigInt> = vec![BigInt::from(-5), BigInt::from(0), BigInt::from(3)];
        assert_eq!(roots, expect);
        // no integer roots
        let q = t().mul(&t()).add(&UniPoly::one());
        assert!(integer_roots(&q).is_empty());
        // rational but non-integer root: 2t-1
        let h = t().scale(&ParamRat::from_int(2)).sub(&UniPoly::one());
        assert!(integer_roots(&h).is_empty());
        // parameterized: (t - n)(t - 2) has integer root 2 only
        let n = ParamRat::var("pn");
        let pp = t().sub(&UniPoly::constant(n)).mul(&t().sub(&UniPoly::from_int(2)));
        assert_eq!(integer_roots(&pp), vec![BigInt::from(2)]);
    }

    #[test]
    fn dispersion_examples() {
        // dispersion(t+3, t) = 3: gcd(t+3, t+3) nontrivial at shift 3
        let p = t().add(&UniPoly::from_int(3));
        let q = t();
        assert_eq!(dispersion(&p, &q), 3);
        // dispersion(t, t+1) = -1: shifting t+1 forward never reaches t
        assert_eq!(dispersion(&q, &p.sub(&UniPoly::from_int(2))), -1);
        let q1 = t().add(&UniPoly::one());
        assert_eq!(dispersion(&q, &q1), -1);
        // multiple alignment shifts
        let f = t().mul(&t().sub(&UniPoly::from_int(4)));
        let g = t().sub(&UniPoly::from_int(1));
        // gcd(f(t), g(t+h)): t-1+h in {t, t-4} -> h in {1, -3}; only 1 valid
        assert_eq!(dispersion_set(&f, &g), vec![1]);
        assert_eq!(dispersion(&f, &g), 1);
    }

    #[test]
    fn ratfun_canonical() {
        // (t^2-1)/(2t-2) = (1/2)(t+1)
        let r = RatFun::new(
            t().mul(&t()).sub(&UniPoly::one()),
            t().scale(&ParamRat::from_int(2)).sub(&UniPoly::from_int(2)),
        );
        assert!(r.is_polynomial());
        assert_eq!(
            r.num(),
            &t().add(&UniPoly::one()).scale(&ParamRat::constant(rat_frac(1, 2)))
        );
        // denominator monic after every operation
        let s = RatFun::new(UniPoly::one(), t().scale(&ParamRat::from_int(3)));
        assert_eq!(s.den(), &t());
        assert_eq!(s.num(), &UniPoly::constant(ParamRat::constant(rat_frac(1, 3))));
    }

    #[test]
    fn ratfun_field_and_shift() {
        let one = RatFun::one();
        let f = one.div(&RatFun::from_poly(t())); // 1/t
        let g = f.shift(1); // 1/(t+1)
        let sum = f.sub(&g); // 1/(t(t+1))
        let expect = RatFun::new(UniPoly::one(), t().mul(&t().add(&UniPoly::one())));
        assert_eq!(sum, expect);
        // shift is a field automorphism: (f*g).shift = f.shift * g.shift
        let prod_shift = f.mul(&g).shift(2);
        assert_eq!(prod_shift, f.shift(2).mul(&g.shift(2)));
        assert_eq!(f.shift(3).shift(-3), f);
        // evaluation and poles
        assert_eq!(f.eval_int(2), Some(ParamRat::constant(rat_frac(1, 2))));
        assert_eq!(f.eval_int(0), None);
    }
}
