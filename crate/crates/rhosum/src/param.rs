//! Multivariate polynomials and rational functions in the symbolic parameters.
//!
//! The constant field K of every difference ring here is Q(n1, ..., nv): the
//! field of rational functions in the free parameters of a summation problem
//! (typically the recurrence parameter n, plus outer summation indices that
//! are still unresolved). `ParamPoly` is a sparse multivariate polynomial
//! over `BigRat`; `ParamRat` is a quotient of two of them kept in canonical
//! form: numerator and denominator coprime, denominator monic with respect
//! to the graded-lexicographic term order, zero represented as 0/1.
//!
//! Parameters are interned process-wide, so a name like "n" denotes the same
//! variable in every polynomial. All arithmetic is exact.

use crate::rat::{rat, BigRat};
use num::{One, Signed, Zero};
use once_cell::sync::Lazy;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

pub type ParamId = u32;

struct Interner {
    names: Vec<String>,
    ids: HashMap<String, ParamId>,
}

static PARAMS: Lazy<Mutex<Interner>> = Lazy::new(|| {
    Mutex::new(Interner {
        names: Vec::new(),
        ids: HashMap::new(),
    })
});

/// Intern a parameter name, returning its stable id for this process.
pub fn param_id(name: &str) -> ParamId {
    let mut g = PARAMS.lock().unwrap();
    if let Some(&id) = g.ids.get(name) {
        return id;
    }
    let id = g.names.len() as ParamId;
    g.names.push(name.to_string());
    g.ids.insert(name.to_string(), id);
    id
}

/// The name behind an interned id.
pub fn param_name(id: ParamId) -> String {
    PARAMS.lock().unwrap().names[id as usize].clone()
}

/// A power product of parameters: sorted by id, no zero exponents.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Mono(Vec<(ParamId, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn var(id: ParamId) -> Self {
        Mono(vec![(id, 1)])
    }

    pub fn var_pow(id: ParamId, e: u32) -> Self {
        if e == 0 {
            Mono::one()
        } else {
            Mono(vec![(id, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_in(&self, id: ParamId) -> u32 {
        self.0
            .iter()
            .find(|&&(v, _)| v == id)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some(&(v1, e1)), Some(&(v2, e2))) => {
                    if v1 == v2 {
                        out.push((v1, e1 + e2));
                        i += 1;
                        j += 1;
                    } else if v1 < v2 {
                        out.push((v1, e1));
                        i += 1;
                    } else {
                        out.push((v2, e2));
                        j += 1;
                    }
                }
                (Some(&t), None) => {
                    out.push(t);
                    i += 1;
                }
                (None, Some(&t)) => {
                    out.push(t);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Mono(out)
    }

    /// Divide by `other` when every exponent allows it.
    pub fn try_div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            while j < other.0.len() && other.0[j].0 < v {
                return None; // divisor has a variable we lack
            }
            if j < other.0.len() && other.0[j].0 == v {
                let d = other.0[j].1;
                if d > e {
                    return None;
                }
                if e > d {
                    out.push((v, e - d));
                }
                j += 1;
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    pub fn vars(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    fn without(&self, id: ParamId) -> Mono {
        Mono(self.0.iter().copied().filter(|&(v, _)| v != id).collect())
    }
}

// Graded lexicographic order: compare total degree first, then lexicographic
// with lower-id variables taking priority (higher exponent on the earliest
// differing variable wins).
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (Some(&(v1, e1)), Some(&(v2, e2))) => {
                    if v1 == v2 {
                        if e1 != e2 {
                            return e1.cmp(&e2);
                        }
                        i += 1;
                        j += 1;
                    } else if v1 < v2 {
                        // self has a positive exponent on an earlier variable
                        return std::cmp::Ordering::Greater;
                    } else {
                        return std::cmp::Ordering::Less;
                    }
                }
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (None, None) => return Ordering::Equal,
            }
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial over the rationals. No zero coefficients
/// are stored; the zero polynomial has an empty term map.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParamPoly {
    terms: BTreeMap<Mono, BigRat>,
}

impl ParamPoly {
    pub fn zero() -> Self {
        ParamPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        ParamPoly::constant(BigRat::one())
    }

    pub fn constant(c: BigRat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(), c);
        }
        ParamPoly { terms }
    }

    pub fn var(id: ParamId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono::var(id), BigRat::one());
        ParamPoly { terms }
    }

    pub fn var_named(name: &str) -> Self {
        ParamPoly::var(param_id(name))
    }

    pub fn from_terms(list: Vec<(Mono, BigRat)>) -> Self {
        let mut p = ParamPoly::zero();
        for (m, c) in list {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Mono, c: BigRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// The constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigRat> {
        if self.is_zero() {
            return Some(BigRat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Mono::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, id: ParamId) -> u32 {
        self.terms
            .keys()
            .map(|m| m.degree_in(id))
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<ParamId> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            s.extend(m.vars());
        }
        s
    }

    /// Leading term in graded-lex order.
    pub fn leading(&self) -> Option<(&Mono, &BigRat)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRat {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(BigRat::zero)
    }

    pub fn add(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> ParamPoly {
        ParamPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &ParamPoly) -> ParamPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn mul_term(&self, m: &Mono, c: &BigRat) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        ParamPoly {
            terms: self
                .terms
                .iter()
                .map(|(m1, c1)| (m1.mul(m), c1 * c))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigRat) -> ParamPoly {
        self.mul_term(&Mono::one(), c)
    }

    pub fn pow(&self, e: u32) -> ParamPoly {
        let mut acc = ParamPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact multivariate division; `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &ParamPoly) -> Option<ParamPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut rem = self.clone();
        let mut quo = ParamPoly::zero();
        let (dm, dc) = {
            let (m, c) = d.leading().unwrap();
            (m.clone(), c.clone())
        };
        while !rem.is_zero() {
            let (rm, rc) = {
                let (m, c) = rem.leading().unwrap();
                (m.clone(), c.clone())
            };
            let qm = rm.try_div(&dm)?;
            let qc = rc / &dc;
            quo.add_term(qm.clone(), qc.clone());
            rem = rem.sub(&d.mul_term(&qm, &qc));
        }
        Some(quo)
    }

    /// Divide by the graded-lex leading coefficient.
    pub fn monic(&self) -> ParamPoly {
        if self.is_zero() {
            return ParamPoly::zero();
        }
        let lc = self.leading_coeff();
        self.scale(&lc.recip())
    }

    /// Dense coefficient list in `id`: index = power, coefficients free of `id`.
    pub fn coeffs_in(&self, id: ParamId) -> Vec<ParamPoly> {
        let deg = self.degree_in(id) as usize;
        let mut out = vec![ParamPoly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.degree_in(id) as usize;
            out[e].add_term(m.without(id), c.clone());
        }
        out
    }

    /// Rebuild from a dense coefficient list in `id`.
    pub fn from_coeffs_in(id: ParamId, coeffs: &[ParamPoly]) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            let xe = ParamPoly {
                terms: {
                    let mut t = BTreeMap::new();
                    t.insert(Mono::var_pow(id, e as u32), BigRat::one());
                    t
                },
            };
            out = out.add(&c.mul(&xe));
        }
        out
    }

    /// Substitute a rational value for one variable.
    pub fn eval_var(&self, id: ParamId, value: &BigRat) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(id);
            let mut coeff = c.clone();
            for _ in 0..e {
                coeff *= value;
            }
            out.add_term(m.without(id), coeff);
        }
        out
    }

    /// Substitute a polynomial for one variable.
    pub fn subst_var(&self, id: ParamId, value: &ParamPoly) -> ParamPoly {
        let coeffs = self.coeffs_in(id);
        let mut out = ParamPoly::zero();
        let mut power = ParamPoly::one();
        for c in coeffs {
            out = out.add(&c.mul(&power));
            power = power.mul(value);
        }
        out
    }

    /// Evaluate with every variable bound.
    pub fn eval(&self, binding: &HashMap<ParamId, BigRat>) -> BigRat {
        let mut acc = BigRat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in &m.0 {
                let val = binding
                    .get(&v)
                    .unwrap_or_else(|| panic!("unbound parameter {}", param_name(v)));
                for _ in 0..e {
                    t *= val;
                }
            }
            acc += t;
        }
        acc
    }

    /// Greatest common divisor, normalized monic in graded-lex order.
    pub fn gcd(a: &ParamPoly, b: &ParamPoly) -> ParamPoly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.is_constant() || b.is_constant() {
            return ParamPoly::one();
        }
        let mut vars = a.vars();
        vars.extend(b.vars());
        let x = *vars.iter().next().unwrap();
        let ua = a.coeffs_in(x);
        let ub = b.coeffs_in(x);
        let cont_a = Self::list_gcd(&ua);
        let cont_b = Self::list_gcd(&ub);
        let cont = ParamPoly::gcd(&cont_a, &cont_b);
        let ppa: Vec<ParamPoly> = ua
            .iter()
            .map(|c| c.exact_div(&cont_a).expect("content divides"))
            .collect();
        let ppb: Vec<ParamPoly> = ub
            .iter()
            .map(|c| c.exact_div(&cont_b).expect("content divides"))
            .collect();
        let gp = Self::primitive_prs(x, ppa, ppb);
        cont.mul(&gp).monic()
    }

    fn list_gcd(list: &[ParamPoly]) -> ParamPoly {
        let mut g = ParamPoly::zero();
        for p in list {
            g = ParamPoly::gcd(&g, p);
            if g.is_constant() && !g.is_zero() {
                return ParamPoly::one();
            }
        }
        g
    }

    // Primitive polynomial remainder sequence in the main variable x. Both
    // the polynomial content and the rational content are stripped from
    // every remainder: pseudo-remainders multiply by the leading coefficient
    // each elimination step, and without removing the accumulated integer
    // factors the coefficient bit sizes grow geometrically along the
    // sequence.
    fn primitive_prs(x: ParamId, mut a: Vec<ParamPoly>, mut b: Vec<ParamPoly>) -> ParamPoly {
        fn deg(v: &[ParamPoly]) -> usize {
            v.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
        }
        fn trim(mut v: Vec<ParamPoly>) -> Vec<ParamPoly> {
            while v.len() > 1 && v.last().unwrap().is_zero() {
                v.pop();
            }
            v
        }
        fn strip_rational(v: Vec<ParamPoly>) -> Vec<ParamPoly> {
            let mut g = num::BigInt::zero();
            let mut l = num::BigInt::one();
            for p in &v {
                for (_, c) in p.terms() {
                    g = num::integer::gcd(g, c.numer().clone());
                    l = num::integer::lcm(l, c.denom().clone());
                }
            }
            if g.is_zero() {
                return v;
            }
            let scale = BigRat::new(l, g);
            if scale.is_one() {
                return v;
            }
            let inv = ParamPoly::constant(scale);
            v.iter().map(|p| p.mul(&inv)).collect()
        }
        a = strip_rational(trim(a));
        b = strip_rational(trim(b));
        if deg(&a) < deg(&b) {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            if b.len() == 1 {
                if b[0].is_zero() {
                    return ParamPoly::from_coeffs_in(x, &a);
                }
                return ParamPoly::one();
            }
            let r = Self::pseudo_rem(&a, &b);
            let r = trim(r);
            if r.len() == 1 && r[0].is_zero() {
                let cont = Self::list_gcd(&b);
                let pp: Vec<ParamPoly> = b
                    .iter()
                    .map(|c| c.exact_div(&cont).expect("content divides"))
                    .collect();
                return ParamPoly::from_coeffs_in(x, &pp);
            }
            let cont = Self::list_gcd(&r);
            let pp: Vec<ParamPoly> = r
                .iter()
                .map(|c| c.exact_div(&cont).expect("content divides"))
                .collect();
            a = b;
            b = strip_rational(pp);
        }
    }

    // Pseudo-remainder of dense coefficient lists in the main variable:
    // lb^(da-db+1) * a mod b, computed without coefficient fractions.
    fn pseudo_rem(a: &[ParamPoly], b: &[ParamPoly]) -> Vec<ParamPoly> {
        let da = a.len() - 1;
        let db = b.len() - 1;
        assert!(db <= da && db >= 1);
        let lb = b[db].clone();
        let mut r: Vec<ParamPoly> = a.to_vec();
        for k in (db..=da).rev() {
            let lead = r[k].clone();
            for c in r.iter_mut().take(k) {
                *c = c.mul(&lb);
            }
            if !lead.is_zero() {
                let shift = k - db;
                for i in 0..db {
                    r[i + shift] = r[i + shift].sub(&b[i].mul(&lead));
                }
            }
            r.truncate(k); // degree-k term eliminated by construction
        }
        r
    }

    /// Iterator over the terms in graded-lex ascending order.
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Sort for display: total degree descending, then by variable names.
        let mut items: Vec<(String, &Mono, &BigRat)> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let key: Vec<String> = m
                    .0
                    .iter()
                    .map(|&(v, e)| format!("{}^{:04}", param_name(v), e))
                    .collect();
                (key.join(" "), m, c)
            })
            .collect();
        items.sort_by(|a, b| {
            b.1.total_degree()
                .cmp(&a.1.total_degree())
                .then_with(|| a.0.cmp(&b.0))
        });
        let mut first = true;
        for (_, m, c) in items {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_one() {
                factors.push(crate::rat::rat_to_string(&mag));
            }
            let mut named: Vec<(String, u32)> = m
                .0
                .iter()
                .map(|&(v, e)| (param_name(v), e))
                .collect();
            named.sort();
            for (name, e) in named {
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{}^{}", name, e));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Rational function in the parameters, kept canonical: numerator and
/// denominator coprime, denominator monic in graded-lex order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParamRat {
    num: ParamPoly,
    den: ParamPoly,
}

impl ParamRat {
    pub fn new(num: ParamPoly, den: ParamPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = ParamRat { num, den };
        r.reduce();
        r
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = ParamPoly::one();
            return;
        }
        let g = ParamPoly::gcd(&self.num, &self.den);
        if !g.is_constant() {
            self.num = self.num.exact_div(&g).expect("gcd divides");
            self.den = self.den.exact_div(&g).expect("gcd divides");
        }
        let lc = self.den.leading_coeff();
        if !lc.is_one() {
            let inv = lc.recip();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn zero() -> Self {
        ParamRat {
            num: ParamPoly::zero(),
            den: ParamPoly::one(),
        }
    }

    pub fn one() -> Self {
        ParamRat {
            num: ParamPoly::one(),
            den: ParamPoly::one(),
        }
    }

    pub fn constant(c: BigRat) -> Self {
        ParamRat {
            num: ParamPoly::constant(c),
            den: ParamPoly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        ParamRat::constant(rat(n))
    }

    pub fn var(name: &str) -> Self {
        ParamRat {
            num: ParamPoly::var_named(name),
            den: ParamPoly::one(),
        }
    }

    pub fn from_poly(p: ParamPoly) -> Self {
        ParamRat {
            num: p,
            den: ParamPoly::one(),
        }
    }

    pub fn num(&self) -> &ParamPoly {
        &self.num
    }

    pub fn den(&self) -> &ParamPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == ParamPoly::one() && self.den == ParamPoly::one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den == ParamPoly::one()
    }

    pub fn as_constant(&self) -> Option<BigRat> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(n / d),
            _ => None,
        }
    }

    pub fn add(&self, other: &ParamRat) -> ParamRat {
        ParamRat::new(
            self.num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> ParamRat {
        ParamRat {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &ParamRat) -> ParamRat {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ParamRat) -> ParamRat {
        ParamRat::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &ParamRat) -> ParamRat {
        assert!(!other.is_zero(), "division by zero");
        ParamRat::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> ParamRat {
        assert!(!self.is_zero(), "reciprocal of zero");
        ParamRat::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i64) -> ParamRat {
        let base = if e < 0 { self.recip() } else { self.clone() };
        let mut acc = ParamRat::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn scale(&self, c: &BigRat) -> ParamRat {
        if c.is_zero() {
            return ParamRat::zero();
        }
        ParamRat {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Evaluate with every parameter bound; `None` on a denominator zero.
    pub fn eval(&self, binding: &HashMap<ParamId, BigRat>) -> Option<BigRat> {
        let d = self.den.eval(binding);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(binding) / d)
    }

    pub fn vars(&self) -> BTreeSet<ParamId> {
        let mut s = self.num.vars();
        s.extend(self.den.vars());
        s
    }
}

impl fmt::Display for ParamRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            return write!(f, "{}", self.num);
        }
        let n = if self.num.num_terms() > 1 {
            format!("({})", self.num)
        } else {
            format!("{}", self.num)
        };
        let d = if self.den.num_terms() > 1 {
            format!("({})", self.den)
        } else {
            format!("{}", self.den)
        };
        write!(f, "{}/{}", n, d)
    }
}
