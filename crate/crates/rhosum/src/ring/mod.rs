//! Difference-ring towers over the rational function field in one shift
//! variable t, with sigma(t) = t + 1.
//!
//! A tower holds three kinds of generators above the base field:
//!   - sign generators z with sigma(z) = -z and z^2 = 1, modelling (-1)^k;
//!   - product generators b with sigma(b) = alpha * b for a unit alpha of
//!     the base field, adjoined as Laurent monomials (b is invertible);
//!   - sum generators h with sigma(h) = h + beta, where beta lives strictly
//!     below h in the tower; these are polynomial generators.
//!
//! Ring elements are finite sums  c * B^m * H^e  with rational-function
//! coefficients c, a multidegree m over the sign/product generators
//! (sign exponents reduced mod the order, product exponents in Z), and a
//! polynomial multidegree e over the sum generators. Multidegree keys are
//! stored with trailing zeros trimmed so adjoining new generators never
//! changes the keys of old elements.
//!
//! Each generator carries an evaluation recipe, so elements can be evaluated
//! exactly at integer points of the shift variable: symbolically in the
//! remaining parameters when possible, and as plain rationals once every
//! parameter is bound.

pub mod represent;

use crate::expr::lin::LinForm;
use crate::param::ParamRat;
use crate::poly::RatFun;
use crate::rat::{binomial_int, pochhammer, rat, BigRat};
use num::{One, Signed};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Multidegree over the sign/product generators (trailing zeros trimmed).
pub type RpDeg = Vec<i32>;
/// Multidegree over the sum generators (trailing zeros trimmed).
pub type SigDeg = Vec<u32>;

fn trim_i32(mut v: Vec<i32>) -> Vec<i32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn trim_u32(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// How a sign/product generator shifts: sigma(b) = ratio * b.
#[derive(Clone, Debug)]
pub enum RpKind {
    /// Finite order lambda with constant ratio; only order 2 with ratio -1
    /// is produced by the frontend, modelling (-1)^k.
    Sign { order: u32, ratio: BigRat },
    /// sigma(b) = ratio * b with ratio a nonzero rational function of t.
    Product { ratio: RatFun },
}

/// Evaluation recipe for a generator at integer points.
#[derive(Clone, Debug)]
pub enum GenEval {
    /// ratio^k for the stored constant ratio.
    SignPower,
    /// base^k, base free of the shift variable.
    PowerBase(ParamRat),
    /// A gamma-quotient atom: product of Gamma(arg)^exp, evaluated through
    /// binomial/pochhammer arithmetic on the stored concrete description.
    GammaAtom(GammaAtom),
    /// Nested power-harmonic sum with the stored weights and scale points,
    /// evaluated by unrolling its defining recursion from the floor.
    Harmonic { weights: Vec<i64>, scales: Vec<BigRat> },
    /// A generator introduced by a telescoping tactic: value at the floor is
    /// the stored start, later values unroll sigma(g) = g + increment (or
    /// sigma(g) = ratio * g for product generators).
    Unrolled { start: ParamRat },
}

/// Concrete description of a hypergeometric atom as a ratio of factorials
/// and binomial/pochhammer pieces; `forms` maps an integer-linear argument
/// (in the shift variable and the parameters) to the exponent of its Gamma
/// factor. Evaluation never touches Gamma itself: it uses the equivalent
/// binomial/pochhammer product recorded in `pieces`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaAtom {
    pub pieces: Vec<AtomPiece>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomPiece {
    /// Binomial[a, b] with integer-linear arguments.
    Binomial(LinForm, LinForm),
    /// Pochhammer[a, m] with integer-linear arguments.
    Pochhammer(LinForm, LinForm),
    /// Factorial[a] with an integer-linear argument.
    Factorial(LinForm),
}

pub struct RpGen {
    pub kind: RpKind,
    pub eval: GenEval,
    pub depth: u32,
    pub floor: i64,
    /// Cache of exact symbolic values at floor, floor+1, ... (None marks a
    /// point where no parameter-symbolic value exists).
    sym_cache: RefCell<Vec<Option<ParamRat>>>,
}

pub struct SigGen {
    /// sigma(h) = h + incr; incr uses only generators strictly below h.
    pub incr: RingElem,
    pub eval: GenEval,
    pub depth: u32,
    pub floor: i64,
    /// Value at the floor.
    pub start: ParamRat,
    sym_cache: RefCell<Vec<Option<ParamRat>>>,
}

#[derive(Default)]
pub struct Tower {
    pub rp: Vec<RpGen>,
    pub sig: Vec<SigGen>,
}

/// An element of the tower ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingElem(pub BTreeMap<RpDeg, BTreeMap<SigDeg, RatFun>>);

#[derive(Clone, Debug, thiserror::Error, PartialEq)]
pub enum EvalPointError {
    #[error("pole at point {0}")]
    Pole(i64),
    #[error("point {0} below the validity floor {1}")]
    BelowFloor(i64, i64),
    #[error("no parameter-symbolic value at point {0}")]
    NotSymbolic(i64),
}

impl RingElem {
    pub fn zero() -> RingElem {
        RingElem(BTreeMap::new())
    }

    pub fn one() -> RingElem {
        RingElem::from_ratfun(RatFun::one())
    }

    pub fn from_ratfun(c: RatFun) -> RingElem {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            let mut inner = BTreeMap::new();
            inner.insert(Vec::new(), c);
            m.insert(Vec::new(), inner);
        }
        RingElem(m)
    }

    pub fn from_int(n: i64) -> RingElem {
        RingElem::from_ratfun(RatFun::from_int(n))
    }

    /// The monomial B^m H^e with coefficient c.
    pub fn monomial(m: RpDeg, e: SigDeg, c: RatFun) -> RingElem {
        if c.is_zero() {
            return RingElem::zero();
        }
        let mut inner = BTreeMap::new();
        inner.insert(trim_u32(e), c);
        let mut outer = BTreeMap::new();
        outer.insert(trim_i32(m), inner);
        RingElem(outer)
    }

    /// The i-th sign/product generator as an element.
    pub fn rp_gen(i: usize) -> RingElem {
        let mut m = vec![0; i + 1];
        m[i] = 1;
        RingElem::monomial(m, Vec::new(), RatFun::one())
    }

    /// The i-th sum generator as an element.
    pub fn sig_gen(i: usize) -> RingElem {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        RingElem::monomial(Vec::new(), e, RatFun::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// The coefficient of B^m H^e.
    pub fn coeff(&self, m: &[i32], e: &[u32]) -> RatFun {
        let m = trim_i32(m.to_vec());
        let e = trim_u32(e.to_vec());
        self.0
            .get(&m)
            .and_then(|inner| inner.get(&e))
            .cloned()
            .unwrap_or_else(RatFun::zero)
    }

    /// The purely rational part (coefficient of the empty monomial).
    pub fn rational_part(&self) -> RatFun {
        self.coeff(&[], &[])
    }

    /// True when the element is a rational function of t alone.
    pub fn is_rational(&self) -> bool {
        self.0.len() <= 1
            && self
                .0
                .iter()
                .all(|(m, inner)| m.is_empty() && inner.keys().all(|e| e.is_empty()))
    }

    pub fn as_ratfun(&self) -> Option<RatFun> {
        if self.is_rational() {
            Some(self.rational_part())
        } else {
            None
        }
    }

    fn insert_term(&mut self, m: RpDeg, e: SigDeg, c: RatFun) {
        if c.is_zero() {
            return;
        }
        let inner = self.0.entry(m).or_default();
        let key = e.clone();
        let entry = inner.entry(e).or_insert_with(RatFun::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            inner.remove(&key);
        }
    }

    fn normalize(mut self) -> RingElem {
        self.0.retain(|_, inner| {
            inner.retain(|_, c| !c.is_zero());
            !inner.is_empty()
        });
        self
    }

    pub fn add(&self, other: &RingElem) -> RingElem {
        let mut out = self.clone();
        for (m, inner) in &other.0 {
            for (e, c) in inner {
                let slot = out
                    .0
                    .entry(m.clone())
                    .or_default()
                    .entry(e.clone())
                    .or_insert_with(RatFun::zero);
                *slot = slot.add(c);
            }
        }
        out.normalize()
    }

    pub fn neg(&self) -> RingElem {
        let mut out = self.clone();
        for inner in out.0.values_mut() {
            for c in inner.values_mut() {
                *c = c.neg();
            }
        }
        out
    }

    pub fn sub(&self, other: &RingElem) -> RingElem {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &RatFun) -> RingElem {
        if c.is_zero() {
            return RingElem::zero();
        }
        let mut out = self.clone();
        for inner in out.0.values_mut() {
            for v in inner.values_mut() {
                *v = v.mul(c);
            }
        }
        out
    }

    /// Product in the tower ring; the tower supplies the orders of the sign
    /// generators for exponent reduction.
    pub fn mul(&self, other: &RingElem, tower: &Tower) -> RingElem {
        let mut out = RingElem::zero();
        for (m1, inner1) in &self.0 {
            for (m2, inner2) in &other.0 {
                let m = tower.add_rp_degrees(m1, m2);
                for (e1, c1) in inner1 {
                    for (e2, c2) in inner2 {
                        let e = add_sig_degrees(e1, e2);
                        out.insert_term(m.clone(), e, c1.mul(c2));
                    }
                }
            }
        }
        out.normalize()
    }

    pub fn pow(&self, e: u32, tower: &Tower) -> RingElem {
        let mut acc = RingElem::one();
        for _ in 0..e {
            acc = acc.mul(self, tower);
        }
        acc
    }

    /// Inverse, when the element is a single term with no sum-generator part
    /// (rational coefficient times a Laurent monomial in the product part).
    pub fn invert(&self, tower: &Tower) -> Option<RingElem> {
        if self.0.len() != 1 {
            return None;
        }
        let (m, inner) = self.0.iter().next().unwrap();
        if inner.len() != 1 {
            return None;
        }
        let (e, c) = inner.iter().next().unwrap();
        if !e.is_empty() || c.is_zero() {
            return None;
        }
        let mut inv_m = Vec::with_capacity(m.len());
        for (i, &mi) in m.iter().enumerate() {
            match &tower.rp[i].kind {
                RpKind::Sign { order, .. } => {
                    let o = *order as i32;
                    inv_m.push((o - mi.rem_euclid(o)) % o);
                }
                RpKind::Product { .. } => inv_m.push(-mi),
            }
        }
        Some(RingElem::monomial(inv_m, Vec::new(), c.recip()))
    }

    /// Largest exponent of the sum generator with index `gi`.
    pub fn sig_degree_in(&self, gi: usize) -> u32 {
        self.0
            .values()
            .flat_map(|inner| inner.keys())
            .map(|e| e.get(gi).copied().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// True when every sum generator used has index < l.
    pub fn sigma_support_below(&self, l: usize) -> bool {
        self.0
            .values()
            .flat_map(|inner| inner.keys())
            .all(|e| e.iter().skip(l).all(|&x| x == 0))
    }

    /// Coefficients of the element viewed as a polynomial in the sum
    /// generator `gi` (index 0 of the result is the constant coefficient).
    pub fn coeffs_in_sig(&self, gi: usize) -> Vec<RingElem> {
        let d = self.sig_degree_in(gi) as usize;
        let mut out = vec![RingElem::zero(); d + 1];
        for (m, inner) in &self.0 {
            for (e, c) in inner {
                let w = e.get(gi).copied().unwrap_or(0) as usize;
                let mut e2 = e.clone();
                if gi < e2.len() {
                    e2[gi] = 0;
                }
                out[w].insert_term(m.clone(), trim_u32(e2), c.clone());
            }
        }
        for o in &mut out {
            let t = std::mem::replace(o, RingElem::zero());
            *o = t.normalize();
        }
        out
    }

    /// Rebuild an element from coefficients in the sum generator `gi`.
    pub fn from_coeffs_in_sig(gi: usize, coeffs: &[RingElem], tower: &Tower) -> RingElem {
        let mut acc = RingElem::zero();
        let h = RingElem::sig_gen(gi);
        let mut hp = RingElem::one();
        for c in coeffs {
            acc = acc.add(&c.mul(&hp, tower));
            hp = hp.mul(&h, tower);
        }
        acc
    }

    /// The rp-degree -> coefficient table of an element with no sum part.
    pub fn rp_components(&self) -> Option<BTreeMap<RpDeg, RatFun>> {
        let mut out = BTreeMap::new();
        for (m, inner) in &self.0 {
            for (e, c) in inner {
                if !e.is_empty() {
                    return None;
                }
                out.insert(m.clone(), c.clone());
            }
        }
        Some(out)
    }

    /// Nesting depth: 0 for constants, 1 when only t and first-level
    /// generators occur, and one more than the deepest defining data
    /// otherwise.
    pub fn depth(&self, tower: &Tower) -> u32 {
        let mut d = 0;
        for (m, inner) in &self.0 {
            for (i, &mi) in m.iter().enumerate() {
                if mi != 0 {
                    d = d.max(tower.rp[i].depth);
                }
            }
            for (e, c) in inner {
                for (i, &ei) in e.iter().enumerate() {
                    if ei != 0 {
                        d = d.max(tower.sig[i].depth);
                    }
                }
                if ratfun_depends_on_t(c) {
                    d = d.max(1);
                }
            }
        }
        d
    }

    /// Apply sigma^j.
    pub fn sigma(&self, tower: &Tower, j: i64) -> RingElem {
        let mut cur = self.clone();
        for _ in 0..j.unsigned_abs() {
            cur = if j > 0 {
                tower.sigma_once(&cur)
            } else {
                tower.sigma_inverse_once(&cur)
            };
        }
        cur
    }

    /// Render with the given generator names.
    pub fn to_string_with(&self, tower: &Tower, rp_names: &[String], sig_names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let _ = tower;
        let mut parts = Vec::new();
        for (m, inner) in &self.0 {
            for (e, c) in inner {
                let mut s = String::new();
                let _ = write!(s, "({})", c);
                for (i, &mi) in m.iter().enumerate() {
                    if mi != 0 {
                        let _ = write!(s, "*{}^{}", rp_names[i], mi);
                    }
                }
                for (i, &ei) in e.iter().enumerate() {
                    if ei != 0 {
                        let _ = write!(s, "*{}^{}", sig_names[i], ei);
                    }
                }
                parts.push(s);
            }
        }
        parts.join(" + ")
    }
}

fn add_sig_degrees(a: &[u32], b: &[u32]) -> SigDeg {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0));
    }
    trim_u32(out)
}

fn ratfun_depends_on_t(c: &RatFun) -> bool {
    c.num().degree_i() > 0 || c.den().degree_i() > 0
}

impl Tower {
    pub fn new() -> Tower {
        Tower::default()
    }

    fn add_rp_degrees(&self, a: &[i32], b: &[i32]) -> RpDeg {
        let n = a.len().max(b.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let s = a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0);
            let r = match self.rp.get(i).map(|g| &g.kind) {
                Some(RpKind::Sign { order, .. }) => s.rem_euclid(*order as i32),
                _ => s,
            };
            out.push(r);
        }
        trim_i32(out)
    }

    /// sigma(B^m) / B^m as a rational function (sign ratios fold into the
    /// rational constant).
    pub fn rp_sigma_factor(&self, m: &[i32]) -> RatFun {
        let mut acc = RatFun::one();
        for (i, &mi) in m.iter().enumerate() {
            if mi == 0 {
                continue;
            }
            match &self.rp[i].kind {
                RpKind::Sign { ratio, .. } => {
                    let mut c = BigRat::one();
                    for _ in 0..mi.unsigned_abs() {
                        c *= ratio.clone();
                    }
                    if mi < 0 {
                        c = c.recip();
                    }
                    acc = acc.scale(&ParamRat::constant(c));
                }
                RpKind::Product { ratio } => {
                    acc = acc.mul(&ratio.pow(mi as i64));
                }
            }
        }
        acc
    }

    /// sigma^{-1}(B^m) / B^m.
    fn rp_sigma_inv_factor(&self, m: &[i32]) -> RatFun {
        let mut acc = RatFun::one();
        for (i, &mi) in m.iter().enumerate() {
            if mi == 0 {
                continue;
            }
            match &self.rp[i].kind {
                RpKind::Sign { ratio, .. } => {
                    let mut c = BigRat::one();
                    for _ in 0..mi.unsigned_abs() {
                        c *= ratio.clone();
                    }
                    if mi > 0 {
                        c = c.recip();
                    }
                    acc = acc.scale(&ParamRat::constant(c));
                }
                RpKind::Product { ratio } => {
                    acc = acc.mul(&ratio.shift(-1).pow(-(mi as i64)));
                }
            }
        }
        acc
    }

    fn sigma_once(&self, x: &RingElem) -> RingElem {
        let mut out = RingElem::zero();
        for (m, inner) in &x.0 {
            let mfac = self.rp_sigma_factor(m);
            for (e, c) in inner {
                let base = RingElem::monomial(m.clone(), Vec::new(), c.shift(1).mul(&mfac));
                let mut term = base;
                for (i, &ei) in e.iter().enumerate() {
                    if ei == 0 {
                        continue;
                    }
                    // (h_i + beta_i)^{e_i}
                    let shifted = RingElem::sig_gen(i).add(&self.sig[i].incr);
                    term = term.mul(&shifted.pow(ei, self), self);
                }
                out = out.add(&term);
            }
        }
        out
    }

    fn sigma_inverse_once(&self, x: &RingElem) -> RingElem {
        let mut out = RingElem::zero();
        for (m, inner) in &x.0 {
            let mfac = self.rp_sigma_inv_factor(m);
            for (e, c) in inner {
                let base = RingElem::monomial(m.clone(), Vec::new(), c.shift(-1).mul(&mfac));
                let mut term = base;
                for (i, &ei) in e.iter().enumerate() {
                    if ei == 0 {
                        continue;
                    }
                    let back = RingElem::sig_gen(i).sub(&self.sigma_inverse_once(&self.sig[i].incr));
                    term = term.mul(&back.pow(ei, self), self);
                }
                out = out.add(&term);
            }
        }
        out
    }

    /// Adjoin a sign generator; returns its index.
    pub fn adjoin_sign(&mut self, order: u32, ratio: BigRat) -> usize {
        self.rp.push(RpGen {
            kind: RpKind::Sign { order, ratio },
            eval: GenEval::SignPower,
            depth: 1,
            floor: 0,
            sym_cache: RefCell::new(Vec::new()),
        });
        self.rp.len() - 1
    }

    /// Adjoin a product generator with the given shift ratio and evaluation
    /// recipe; returns its index.
    pub fn adjoin_product(&mut self, ratio: RatFun, eval: GenEval, floor: i64) -> usize {
        let depth = 1 + if ratfun_depends_on_t(&ratio) { 1 } else { 0 };
        self.rp.push(RpGen {
            kind: RpKind::Product { ratio },
            eval,
            depth,
            floor,
            sym_cache: RefCell::new(Vec::new()),
        });
        self.rp.len() - 1
    }

    /// Adjoin a sum generator with sigma(h) = h + incr; incr must use only
    /// existing generators.
    pub fn adjoin_sum(&mut self, incr: RingElem, eval: GenEval, floor: i64, start: ParamRat) -> usize {
        assert!(
            incr.sigma_support_below(self.sig.len()),
            "sum generator increment may only use earlier generators"
        );
        let depth = 1 + incr.depth(self);
        self.sig.push(SigGen {
            incr,
            eval,
            depth,
            floor,
            start,
            sym_cache: RefCell::new(Vec::new()),
        });
        self.sig.len() - 1
    }

    /// The shift ratio of a product generator.
    pub fn product_ratio(&self, i: usize) -> Option<&RatFun> {
        match &self.rp[i].kind {
            RpKind::Product { ratio } => Some(ratio),
            RpKind::Sign { .. } => None,
        }
    }

    /// True when the element is fixed by the shift, i.e. a constant of the
    /// tower. For a correctly built tower this happens exactly on K.
    pub fn is_constant(&self, x: &RingElem) -> bool {
        x.sigma(self, 1) == *x
    }

    /// Smallest point at which every generator of the element is defined.
    pub fn elem_floor(&self, x: &RingElem) -> i64 {
        let mut f = 0;
        for (m, inner) in &x.0 {
            for (i, &mi) in m.iter().enumerate() {
                if mi != 0 {
                    f = f.max(self.rp[i].floor);
                }
            }
            for e in inner.keys() {
                for (i, &ei) in e.iter().enumerate() {
                    if ei != 0 {
                        f = f.max(self.sig[i].floor);
                    }
                }
            }
        }
        f
    }

    /// Exact value of a generator at integer point k, symbolic in the
    /// parameters. None marks “no symbolic value here”.
    fn rp_value_at(&self, i: usize, k: i64) -> Result<ParamRat, EvalPointError> {
        let g = &self.rp[i];
        if k < g.floor {
            return Err(EvalPointError::BelowFloor(k, g.floor));
        }
        let idx = (k - g.floor) as usize;
        {
            // a None slot is only a placeholder: earlier points are filled
            // lazily, so recompute rather than read it as "not symbolic"
            let cache = g.sym_cache.borrow();
            if let Some(Some(v)) = cache.get(idx) {
                return Ok(v.clone());
            }
        }
        let value = self.rp_value_compute(i, k);
        let mut cache = g.sym_cache.borrow_mut();
        if cache.len() <= idx {
            cache.resize(idx + 1, None);
        }
        cache[idx] = value.clone();
        value.ok_or(EvalPointError::NotSymbolic(k))
    }

    fn rp_value_compute(&self, i: usize, k: i64) -> Option<ParamRat> {
        let g = &self.rp[i];
        match &g.eval {
            GenEval::SignPower => {
                let RpKind::Sign { ratio, .. } = &g.kind else {
                    return None;
                };
                let mut c = BigRat::one();
                for _ in 0..(k - g.floor) {
                    c *= ratio.clone();
                }
                Some(ParamRat::constant(c))
            }
            GenEval::PowerBase(base) => Some(base.pow(k)),
            GenEval::GammaAtom(atom) => atom.value_at(k),
            GenEval::Unrolled { start } => {
                // start * prod_{j=floor}^{k-1} ratio(j)
                let RpKind::Product { ratio } = &g.kind else {
                    return None;
                };
                let mut acc = start.clone();
                for j in g.floor..k {
                    let r = ratio.eval_int(j)?;
                    if r.is_zero() {
                        return None;
                    }
                    acc = acc.mul(&r);
                }
                Some(acc)
            }
            GenEval::Harmonic { .. } => None,
        }
    }

    fn sig_value_at(&self, i: usize, k: i64) -> Result<ParamRat, EvalPointError> {
        let g = &self.sig[i];
        if k < g.floor {
            return Err(EvalPointError::BelowFloor(k, g.floor));
        }
        let idx = (k - g.floor) as usize;
        {
            let cache = g.sym_cache.borrow();
            if let Some(Some(v)) = cache.get(idx) {
                return Ok(v.clone());
            }
        }
        // Unroll sigma(h) = h + incr from the last cached point.
        let mut from = {
            let cache = g.sym_cache.borrow();
            let mut last = None;
            for (j, v) in cache.iter().enumerate() {
                if let Some(x) = v {
                    last = Some((j, x.clone()));
                }
            }
            last
        };
        if from.is_none() {
            from = Some((0, g.start.clone()));
            let mut cache = g.sym_cache.borrow_mut();
            if cache.is_empty() {
                cache.push(Some(g.start.clone()));
            }
        }
        let (mut at, mut val) = from.unwrap();
        while at < idx {
            let point = g.floor + at as i64;
            let step = self.elem_value_at(&g.incr, point)?;
            val = val.add(&step);
            at += 1;
            let mut cache = g.sym_cache.borrow_mut();
            if cache.len() <= at {
                cache.resize(at + 1, None);
            }
            cache[at] = Some(val.clone());
        }
        Ok(val)
    }

    /// Exact value of an element at integer point k of the shift variable,
    /// symbolic in the parameters.
    pub fn elem_value_at(&self, x: &RingElem, k: i64) -> Result<ParamRat, EvalPointError> {
        let mut acc = ParamRat::zero();
        for (m, inner) in &x.0 {
            let mut mv = ParamRat::one();
            for (i, &mi) in m.iter().enumerate() {
                if mi == 0 {
                    continue;
                }
                let v = self.rp_value_at(i, k)?;
                if v.is_zero() {
                    if mi < 0 {
                        return Err(EvalPointError::Pole(k));
                    }
                    mv = ParamRat::zero();
                } else {
                    mv = mv.mul(&v.pow(mi as i64));
                }
            }
            for (e, c) in inner {
                let cv = c.eval_int(k).ok_or(EvalPointError::Pole(k))?;
                let mut term = mv.mul(&cv);
                for (i, &ei) in e.iter().enumerate() {
                    if ei == 0 {
                        continue;
                    }
                    let hv = self.sig_value_at(i, k)?;
                    term = term.mul(&hv.pow(ei as i64));
                }
                acc = acc.add(&term);
            }
        }
        Ok(acc)
    }
}

impl GammaAtom {
    /// sigma-quotient of the atom: value(k+1)/value(k) as a rational
    /// function of t and the parameters.
    pub fn sigma_ratio(&self, var: &str) -> Option<RatFun> {
        let mut acc = RatFun::one();
        for p in &self.pieces {
            acc = acc.mul(&p.sigma_ratio(var)?);
        }
        Some(acc)
    }

    pub fn value_at(&self, k: i64) -> Option<ParamRat> {
        let mut acc = ParamRat::one();
        for p in &self.pieces {
            acc = acc.mul(&p.value_at(k)?);
        }
        Some(acc)
    }
}

/// LinForm in the summation variable `var` as value at integer k, symbolic
/// in the other names.
fn lin_value_at(l: &LinForm, var: &str, k: i64) -> ParamRat {
    let mut acc = ParamRat::constant(rat(l.constant + l.coeff_of(var) * k));
    for (name, &c) in l.coeffs.iter() {
        if name == var {
            continue;
        }
        acc = acc.add(&ParamRat::var(name).scale(&rat(c)));
    }
    acc
}

/// LinForm as a rational function with `var` mapped to t.
pub fn lin_to_ratfun(l: &LinForm, var: &str) -> RatFun {
    let mut c = ParamRat::constant(rat(l.constant));
    for (name, &a) in l.coeffs.iter() {
        if name == var {
            continue;
        }
        c = c.add(&ParamRat::var(name).scale(&rat(a)));
    }
    let t_coeff = l.coeff_of(var);
    RatFun::from_poly(crate::poly::UniPoly::new(vec![c, ParamRat::constant(rat(t_coeff))]))
}

/// Pochhammer-style quotient Gamma(f + d) / Gamma(f) for an integer d, as
/// a rational function of the form's variables (with `var` as t).
fn gamma_ratio(f: &LinForm, var: &str, d: i64) -> RatFun {
    let base = lin_to_ratfun(f, var);
    let mut acc = RatFun::one();
    if d >= 0 {
        for i in 0..d {
            acc = acc.mul(&base.add(&RatFun::from_int(i)));
        }
    } else {
        for i in 1..=(-d) {
            acc = acc.div(&base.sub(&RatFun::from_int(i)));
        }
    }
    acc
}

/// Symbolic Pochhammer (a)_m for integer m with a symbolic base.
fn poch_param(a: &ParamRat, m: i64) -> Option<ParamRat> {
    let mut acc = ParamRat::one();
    if m >= 0 {
        for i in 0..m {
            acc = acc.mul(&a.add(&ParamRat::constant(rat(i))));
        }
    } else {
        for i in 1..=(-m) {
            let f = a.sub(&ParamRat::constant(rat(i)));
            if f.is_zero() {
                return None;
            }
            acc = acc.div(&f);
        }
    }
    Some(acc)
}

/// Symbolic binomial: needs the lower argument or the difference of the
/// arguments to be a concrete integer.
fn binom_param(a: &ParamRat, b: &ParamRat) -> Option<ParamRat> {
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        if x.is_integer() && y.is_integer() {
            let xi = num::ToPrimitive::to_i64(&x.to_integer())?;
            let yi = num::ToPrimitive::to_i64(&y.to_integer())?;
            return Some(ParamRat::constant(binomial_int(xi, yi)));
        }
    }
    if let Some(y) = b.as_constant() {
        if y.is_integer() {
            let yi: i64 = num::ToPrimitive::to_i64(&y.to_integer())?;
            if yi < 0 {
                return Some(ParamRat::zero());
            }
            // C(a, m) = (a-m+1)_m / m!
            let base = a.sub(&ParamRat::constant(rat(yi - 1)));
            let num = poch_param(&base, yi)?;
            return Some(num.scale(&crate::rat::factorial(yi).recip()));
        }
    }
    let diff = a.sub(b);
    if let Some(d) = diff.as_constant() {
        if d.is_integer() {
            let di: i64 = num::ToPrimitive::to_i64(&d.to_integer())?;
            if di < 0 {
                // C(a, b) with b - a a positive integer and symbolic a:
                // zero only for integer arguments, which we cannot decide
                // symbolically.
                return None;
            }
            // C(a, a - d) = C(a, d) when a is a nonnegative-style symbol.
            let base = a.sub(&ParamRat::constant(rat(di - 1)));
            let num = poch_param(&base, di)?;
            return Some(num.scale(&crate::rat::factorial(di).recip()));
        }
    }
    None
}

impl AtomPiece {
    fn sigma_ratio(&self, var: &str) -> Option<RatFun> {
        match self {
            AtomPiece::Factorial(a) => {
                // (a+1)! / a! style: Gamma(a+1) shifts by the k-coefficient.
                let d = a.coeff_of(var);
                let mut arg = a.clone();
                arg.constant += 1; // Gamma(a + 1)
                Some(gamma_ratio(&arg, var, d))
            }
            AtomPiece::Binomial(a, b) => {
                let da = a.coeff_of(var);
                let db = b.coeff_of(var);
                let mut ga = a.clone();
                ga.constant += 1;
                let mut gb = b.clone();
                gb.constant += 1;
                let mut gc = a.sub(b);
                gc.constant += 1;
                let dc = da - db;
                let num = gamma_ratio(&ga, var, da);
                let den = gamma_ratio(&gb, var, db).mul(&gamma_ratio(&gc, var, dc));
                if den.is_zero() {
                    return None;
                }
                Some(num.div(&den))
            }
            AtomPiece::Pochhammer(a, m) => {
                // (a)_m = Gamma(a+m)/Gamma(a)
                let top = a.add(m);
                let da = a.coeff_of(var);
                let dt = top.coeff_of(var);
                let num = gamma_ratio(&top, var, dt);
                let den = gamma_ratio(a, var, da);
                if den.is_zero() {
                    return None;
                }
                Some(num.div(&den))
            }
        }
    }

    fn value_at(&self, k: i64) -> Option<ParamRat> {
        match self {
            AtomPiece::Factorial(a) => {
                let v = lin_value_at(a, VAR_SENTINEL, k);
                let c = v.as_constant()?;
                if !c.is_integer() || c.is_negative() {
                    return None;
                }
                let n: i64 = num::ToPrimitive::to_i64(&c.to_integer())?;
                Some(ParamRat::constant(crate::rat::factorial(n)))
            }
            AtomPiece::Binomial(a, b) => {
                let av = lin_value_at(a, VAR_SENTINEL, k);
                let bv = lin_value_at(b, VAR_SENTINEL, k);
                binom_param(&av, &bv)
            }
            AtomPiece::Pochhammer(a, m) => {
                let av = lin_value_at(a, VAR_SENTINEL, k);
                let mv = lin_value_at(m, VAR_SENTINEL, k);
                let mc = mv.as_constant()?;
                if !mc.is_integer() {
                    return None;
                }
                let mi: i64 = num::ToPrimitive::to_i64(&mc.to_integer())?;
                if let Some(ac) = av.as_constant() {
                    return Some(ParamRat::constant(pochhammer(&ac, mi)));
                }
                poch_param(&av, mi)
            }
        }
    }
}

/// The summation variable is substituted before atoms are stored, so pieces
/// carry forms over a fixed internal name.
pub const VAR_SENTINEL: &str = "@t";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::ParamRat;
    use crate::rat::rat_frac;

    fn t_plus(c: i64) -> RatFun {
        RatFun::from_poly(crate::poly::UniPoly::var_plus(c))
    }

    fn harmonic_tower() -> Tower {
        let mut tw = Tower::new();
        // sigma(h) = h + 1/(t+1), modelling S1(k)
        let incr = RingElem::from_ratfun(RatFun::one().div(&t_plus(1)));
        tw.adjoin_sum(
            incr,
            GenEval::Harmonic {
                weights: vec![1],
                scales: vec![BigRat::one()],
            },
            0,
            ParamRat::zero(),
        );
        tw
    }

    #[test]
    fn sigma_of_harmonic_power() {
        let tw = harmonic_tower();
        let h = RingElem::sig_gen(0);
        let h2 = h.pow(2, &tw);
        let s = h2.sigma(&tw, 1);
        // (h + 1/(t+1))^2 = h^2 + 2h/(t+1) + 1/(t+1)^2
        assert_eq!(s.coeff(&[], &[2]), RatFun::one());
        assert_eq!(
            s.coeff(&[], &[1]),
            RatFun::from_int(2).div(&t_plus(1))
        );
        assert_eq!(
            s.coeff(&[], &[]),
            RatFun::one().div(&t_plus(1).mul(&t_plus(1)))
        );
        // round trip through the inverse shift
        assert_eq!(s.sigma(&tw, -1), h2);
    }

    #[test]
    fn sign_generator_squares_away() {
        let mut tw = Tower::new();
        tw.adjoin_sign(2, -BigRat::one());
        let z = RingElem::rp_gen(0);
        assert_eq!(z.mul(&z, &tw), RingElem::one());
        let s = z.sigma(&tw, 1);
        assert_eq!(s, z.neg());
        assert_eq!(z.sigma(&tw, -1), z.neg());
    }

    #[test]
    fn product_generator_shift_and_inverse() {
        let mut tw = Tower::new();
        // sigma(b) = 2 b, modelling 2^k
        tw.adjoin_product(
            RatFun::from_int(2),
            GenEval::PowerBase(ParamRat::constant(rat(2))),
            0,
        );
        let b = RingElem::rp_gen(0);
        assert_eq!(b.sigma(&tw, 1), b.scale(&RatFun::from_int(2)));
        let binv = b.invert(&tw).unwrap();
        assert_eq!(b.mul(&binv, &tw), RingElem::one());
        assert_eq!(binv.sigma(&tw, 1), binv.scale(&RatFun::one().div(&RatFun::from_int(2))));
        // values: 2^5 = 32, and the inverse evaluates to 1/32
        assert_eq!(
            tw.elem_value_at(&b, 5).unwrap(),
            ParamRat::constant(rat(32))
        );
        assert_eq!(
            tw.elem_value_at(&binv, 5).unwrap(),
            ParamRat::constant(rat_frac(1, 32))
        );
    }

    #[test]
    fn harmonic_values_by_unrolling() {
        let tw = harmonic_tower();
        let h = RingElem::sig_gen(0);
        assert_eq!(tw.elem_value_at(&h, 0).unwrap(), ParamRat::zero());
        assert_eq!(
            tw.elem_value_at(&h, 3).unwrap(),
            ParamRat::constant(rat_frac(11, 6))
        );
        // telescoping: sigma(h) - h = 1/(t+1) at every point
        let diff = h.sigma(&tw, 1).sub(&h);
        for k in 0..6 {
            assert_eq!(
                tw.elem_value_at(&diff, k).unwrap(),
                ParamRat::constant(rat_frac(1, k + 1))
            );
        }
    }

    #[test]
    fn gamma_atom_binomial_ratio_and_value() {
        // C(n, k): sigma-quotient (n - t) / (t + 1)
        let a = LinForm::var("n");
        let b = LinForm::var(VAR_SENTINEL);
        let atom = GammaAtom {
            pieces: vec![AtomPiece::Binomial(a, b)],
        };
        let r = atom.sigma_ratio(VAR_SENTINEL).unwrap();
        let expect = RatFun::from_poly(crate::poly::UniPoly::new(vec![
            ParamRat::var("n"),
            ParamRat::constant(rat(-1)),
        ]))
        .div(&t_plus(1));
        assert_eq!(r, expect);
        // value at k = 2: n(n-1)/2
        let v = atom.value_at(2).unwrap();
        let n = ParamRat::var("n");
        let expect_v = n.mul(&n.sub(&ParamRat::one())).scale(&rat_frac(1, 2));
        assert_eq!(v, expect_v);
    }

    #[test]
    fn depth_tracks_nesting() {
        let mut tw = Tower::new();
        tw.adjoin_product(
            RatFun::from_int(2),
            GenEval::PowerBase(ParamRat::constant(rat(2))),
            0,
        );
        assert_eq!(tw.rp[0].depth, 1);
        let incr = RingElem::from_ratfun(RatFun::one().div(&t_plus(1)));
        let s1 = tw.adjoin_sum(
            incr,
            GenEval::Harmonic {
                weights: vec![1],
                scales: vec![BigRat::one()],
            },
            0,
            ParamRat::zero(),
        );
        assert_eq!(tw.sig[s1].depth, 2);
        // an increment using S1 gives depth 3
        let incr2 = RingElem::sig_gen(s1).scale(&RatFun::one().div(&t_plus(1)));
        let s2 = tw.adjoin_sum(
            incr2,
            GenEval::Harmonic {
                weights: vec![1, 1],
                scales: vec![BigRat::one(), BigRat::one()],
            },
            0,
            ParamRat::zero(),
        );
        assert_eq!(tw.sig[s2].depth, 3);
    }
}
