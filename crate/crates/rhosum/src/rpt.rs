//! Parameterized telescoping in a difference-ring tower, with escalating
//! tactics.
//!
//! The core problem: given f_1..f_d in the tower ring, find constants
//! c_1..c_d (c_1 nonzero) and a certificate g with
//!
//!     sigma(g) - g = c_1 f_1 + ... + c_d f_d.
//!
//! Writing the ring as a polynomial ring in its topmost sum generator s with
//! sigma(s) = s + beta, a solution of degree D in s splits into one equation
//! per power of s:
//!
//!     sigma(g_w) - g_w = rhs_w - sum_{e>w} C(e,w) sigma(g_e) beta^{e-w},
//!
//! solved top down; each level is the same problem one generator lower, so
//! the recursion bottoms out in the product-monomial module over K(t), where
//! `prs` takes over. A degree-D ansatz with D = deg_s(f) + 1 is complete for
//! the sum extensions arising here. The solution space is tracked as a basis
//! of vectors (c, g) so the constants stay coupled across all levels.
//!
//! When no exact pair exists, the later tactics allow the bottom equation of
//! the constant-coefficient spine to leave a remainder rho:
//!
//!     sigma(g) - g + rho = c_1 f_1 + ... + c_d f_d,
//!
//! and adjoin a new sum generator tau with sigma(tau) = tau + rho/gamma,
//! absorbing rho as gamma*tau in the certificate (gamma is the leading
//! parameter content of rho, so the increment is normalized). The remainder
//! is kept minimal by a ladder: candidate denominators are enumerated from
//! the divisor lattice of the unresolved right-hand side, smallest degree
//! first, and the search stops at the first success. The escalation order:
//!
//!  * tactic 1: exact solutions only;
//!  * tactic 2: also a remainder whose new generator does not exceed the
//!    nesting depth of the telescoped combination;
//!  * tactic 3: tactic 2, then a remainder confined to the shortest prefix
//!    of the generator list (depth-sorted), regardless of depth;
//!  * tactic 4: tactic 3, then the defining fallback sigma(tau) = tau + f_1
//!    with c = (1, 0, .., 0), which never fails.
//!
//! Remainders are only sought on the spine of constant coefficients, never
//! at positive powers of a sum generator, and never inside a prefix that
//! ends in a sum generator; a search that fails for that reason reports
//! NoSolution with the incomplete flag set rather than claiming
//! nonexistence.

use crate::param::ParamRat;
use crate::poly::{integer_roots, RatFun, UniPoly};
use crate::prs::{prs_solve, prs_solve_residual, PrsComponent, PrsInput};
use crate::rat::binomial_int;
use crate::ring::{GenEval, RingElem, RpDeg, SigDeg, Tower};
use num::ToPrimitive;
use std::collections::{BTreeMap, BTreeSet};

/// Escalation level for `rpt_solve`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tactic {
    Rpt1,
    Rpt2,
    Rpt3,
    Rpt4,
}

/// Description of a sum generator adjoined while solving.
#[derive(Clone, Debug)]
pub struct AdjoinedGen {
    /// Index of the new generator in the tower's sum-generator list.
    pub index: usize,
    /// Its shift increment, normalized to leading parameter content one.
    pub increment: RingElem,
}

#[derive(Clone, Debug)]
pub struct RptSolution {
    /// The telescoper coefficients; the first entry is nonzero.
    pub c: Vec<ParamRat>,
    /// Certificate with sigma(g) - g = sum c_i f_i in the (possibly
    /// extended) tower.
    pub g: RingElem,
    pub adjoined: Option<AdjoinedGen>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum RptOutcome {
    Solved(RptSolution),
    /// No solution within the tactic's search space. `incomplete` is set
    /// when a bounded search was exhausted, so nonexistence is not certified.
    NoSolution { incomplete: bool },
}

/// Cap on the remainder-denominator ladder.
const MAX_DEN_DEG: usize = 16;

/// One basis vector of the (c, g) solution space, with the optional
/// unresolved remainder of the bottom equation.
#[derive(Clone)]
struct SigVec {
    kappa: Vec<ParamRat>,
    g: RingElem,
    rho: RingElem,
}

struct ResidualPlan {
    /// Remainders may only use product-monomial generators with index below
    /// this.
    prefix_rp: usize,
    /// Candidate denominators are capped at this degree.
    max_den_deg: usize,
}

fn pscale(x: &RingElem, c: &ParamRat) -> RingElem {
    x.scale(&RatFun::from_const(c.clone()))
}

fn combine(f: &[RingElem], kappa: &[ParamRat]) -> RingElem {
    let mut acc = RingElem::zero();
    for (x, k) in f.iter().zip(kappa) {
        if !k.is_zero() {
            acc = acc.add(&pscale(x, k));
        }
    }
    acc
}

fn elem_from_components(w: &BTreeMap<RpDeg, RatFun>) -> RingElem {
    let mut acc = RingElem::zero();
    for (deg, q) in w {
        acc = acc.add(&RingElem::monomial(deg.clone(), Vec::new(), q.clone()));
    }
    acc
}

/// Solve sigma(g) - g (+ rho) = sum kappa_i f_i at the given tower level
/// (number of usable sum generators), returning a basis of the solution
/// space. Remainders are admitted only along the constant-coefficient spine,
/// in the bottom product-monomial equation.
fn sigma_solve(tower: &Tower, level: usize, f: &[RingElem], plan: Option<&ResidualPlan>) -> Vec<SigVec> {
    if level == 0 {
        return base_solve(tower, f, plan);
    }
    let gi = level - 1;
    let d = f.len();
    let bdeg = f.iter().map(|x| x.sig_degree_in(gi)).max().unwrap_or(0) as usize;
    let gdeg = bdeg + 1;
    let beta = tower.sig[gi].incr.clone();
    let f_cof: Vec<Vec<RingElem>> = f
        .iter()
        .map(|x| {
            let mut v = x.coeffs_in_sig(gi);
            v.resize(gdeg + 1, RingElem::zero());
            v
        })
        .collect();

    // g-parts stored top degree first
    struct Part {
        kappa: Vec<ParamRat>,
        gw: Vec<RingElem>,
        rho: RingElem,
    }
    let mut basis: Vec<Part> = (0..d)
        .map(|j| {
            let mut k = vec![ParamRat::zero(); d];
            k[j] = ParamRat::one();
            Part { kappa: k, gw: Vec::new(), rho: RingElem::zero() }
        })
        .collect();

    for w in (0..=gdeg).rev() {
        let done = gdeg - w; // number of levels already fixed per vector
        let mut cols: Vec<RingElem> = Vec::with_capacity(basis.len());
        for part in &basis {
            let mut phi = RingElem::zero();
            for (j, kj) in part.kappa.iter().enumerate() {
                if !kj.is_zero() {
                    phi = phi.add(&pscale(&f_cof[j][w], kj));
                }
            }
            for (idx, ge) in part.gw.iter().enumerate() {
                let e = gdeg - idx;
                let bin = ParamRat::constant(binomial_int(e as i64, w as i64));
                let cross = ge
                    .sigma(tower, 1)
                    .mul(&beta.pow((e - w) as u32, tower), tower);
                phi = phi.sub(&pscale(&cross, &bin));
            }
            debug_assert_eq!(phi.sig_degree_in(gi), 0, "level split left the top generator");
            cols.push(phi);
        }
        let sub = sigma_solve(tower, gi, &cols, if w == 0 { plan } else { None });
        let mut next: Vec<Part> = Vec::with_capacity(sub.len());
        for sv in sub {
            let mut kap = vec![ParamRat::zero(); d];
            let mut gw = vec![RingElem::zero(); done];
            let mut rho = sv.rho;
            for (i, ki) in sv.kappa.iter().enumerate() {
                if ki.is_zero() {
                    continue;
                }
                for (a, b) in kap.iter_mut().zip(basis[i].kappa.iter()) {
                    *a = a.add(&b.mul(ki));
                }
                for (slot, ge) in gw.iter_mut().zip(basis[i].gw.iter()) {
                    *slot = slot.add(&pscale(ge, ki));
                }
                if !basis[i].rho.is_zero() {
                    rho = rho.add(&pscale(&basis[i].rho, ki));
                }
            }
            gw.push(sv.g);
            next.push(Part { kappa: kap, gw, rho });
        }
        basis = next;
        if basis.is_empty() {
            // not even the zero-extension survives below; no solutions
            return Vec::new();
        }
    }

    basis
        .into_iter()
        .map(|p| {
            let mut coeffs = p.gw;
            coeffs.reverse();
            let g = RingElem::from_coeffs_in_sig(gi, &coeffs, tower);
            SigVec { kappa: p.kappa, g, rho: p.rho }
        })
        .collect()
}

/// Bottom of the recursion: the product-monomial module over K(t).
fn base_solve(tower: &Tower, f: &[RingElem], plan: Option<&ResidualPlan>) -> Vec<SigVec> {
    let d = f.len();
    let comps_of: Vec<BTreeMap<RpDeg, RatFun>> = f
        .iter()
        .map(|x| x.rp_components().expect("sum generator at the bottom level"))
        .collect();
    let mut degs: BTreeSet<RpDeg> = BTreeSet::new();
    degs.insert(Vec::new());
    for c in &comps_of {
        degs.extend(c.keys().cloned());
    }
    let components: Vec<PrsComponent> = degs
        .iter()
        .map(|dg| PrsComponent {
            deg: dg.clone(),
            sigma_factor: tower.rp_sigma_factor(dg),
            rhs: comps_of
                .iter()
                .map(|c| c.get(dg).cloned().unwrap_or_else(RatFun::zero))
                .collect(),
        })
        .collect();
    let input = PrsInput {
        op: vec![RatFun::from_int(-1), RatFun::one()],
        d,
        components: components.clone(),
    };
    let sols = match plan {
        None => prs_solve(&input),
        Some(pl) => {
            let mut spec = BTreeMap::new();
            for comp in &components {
                let outside = comp
                    .deg
                    .iter()
                    .enumerate()
                    .any(|(i, &e)| e != 0 && i >= pl.prefix_rp);
                if outside {
                    continue;
                }
                let mut den = UniPoly::one();
                for r in &comp.rhs {
                    den = UniPoly::lcm(&den, r.den());
                }
                let cands: Vec<UniPoly> = divisor_candidates(&den)
                    .into_iter()
                    .filter(|c| c.degree().unwrap_or(0) <= pl.max_den_deg)
                    .collect();
                if !cands.is_empty() {
                    spec.insert(comp.deg.clone(), cands);
                }
            }
            prs_solve_residual(&input, &spec)
        }
    };
    sols.into_iter()
        .map(|s| SigVec {
            kappa: s.c,
            g: elem_from_components(&s.w),
            rho: elem_from_components(&s.rho),
        })
        .collect()
}

/// Monic divisors of a denominator, coarsened to the blocks that the
/// squarefree structure and the shift-orbit relations distinguish, sorted by
/// degree. Used as the candidate lattice for minimal remainders.
fn divisor_candidates(den: &UniPoly) -> Vec<UniPoly> {
    if den.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let den = den.monic();
    // squarefree split: den = prod S_i^i with the S_i pairwise coprime
    let mut blocks: Vec<(UniPoly, usize)> = Vec::new();
    {
        let mut g = UniPoly::gcd(&den, &den.derivative()).monic();
        let mut w = den.exact_div(&g);
        let mut i = 1usize;
        while w.degree().unwrap_or(0) > 0 {
            let y = UniPoly::gcd(&w, &g).monic();
            let z = w.exact_div(&y);
            if z.degree().unwrap_or(0) > 0 {
                blocks.push((z.monic(), i));
            }
            w = y.clone();
            g = g.exact_div(&y);
            i += 1;
        }
    }
    // refine each block along its shift orbits so factors a distance apart
    // become separate candidates
    let mut pieces: Vec<(UniPoly, usize)> = Vec::new();
    for (s, mult) in blocks {
        let mut parts = vec![s.clone()];
        for j in crate::poly::dispersion_set(&s, &s) {
            if j == 0 {
                continue;
            }
            let shifted = s.shift(j as i64);
            let mut refined = Vec::new();
            for p in parts {
                let g = UniPoly::gcd(&p, &shifted);
                let dg = g.degree().unwrap_or(0);
                if dg > 0 && dg < p.degree().unwrap_or(0) {
                    refined.push(g.monic().clone());
                    refined.push(p.exact_div(&g).monic());
                } else {
                    refined.push(p);
                }
            }
            parts = refined;
        }
        for p in parts {
            pieces.push((p, mult));
        }
    }
    // all products of the pieces up to their multiplicities
    let mut cands = vec![UniPoly::one()];
    for (p, mult) in &pieces {
        let mut next = Vec::new();
        for c in &cands {
            let mut acc = c.clone();
            next.push(acc.clone());
            for _ in 0..*mult {
                acc = acc.mul(p);
                next.push(acc.clone());
            }
        }
        cands = next;
        if cands.len() > 256 {
            break;
        }
    }
    cands.retain(|c| c.degree().unwrap_or(0) > 0);
    cands.sort_by_key(|c| (c.degree_i(), c.to_string_in("@t")));
    cands.dedup_by(|a, b| a == b);
    cands
}

/// Reduced-echelon normalization of a solution basis over the constant
/// coordinates. Row operations carry the certificates and remainders along.
/// Returns the pivot rows and, separately, the pure-kernel rows (constants
/// all zero): homogeneous directions that a caller may use to canonicalize a
/// chosen solution without changing its constants.
fn echelon(mut rows: Vec<SigVec>, d: usize) -> (Vec<SigVec>, Vec<SigVec>) {
    let mut r = 0;
    for col in 0..d {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].kappa[col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r].kappa[col].recip();
        rows[r] = SigVec {
            kappa: rows[r].kappa.iter().map(|x| x.mul(&inv)).collect(),
            g: pscale(&rows[r].g, &inv),
            rho: pscale(&rows[r].rho, &inv),
        };
        for i in 0..rows.len() {
            if i == r || rows[i].kappa[col].is_zero() {
                continue;
            }
            let fac = rows[i].kappa[col].clone();
            rows[i] = SigVec {
                kappa: rows[i]
                    .kappa
                    .iter()
                    .zip(rows[r].kappa.iter())
                    .map(|(a, b)| a.sub(&b.mul(&fac)))
                    .collect(),
                g: rows[i].g.sub(&pscale(&rows[r].g, &fac)),
                rho: rows[i].rho.sub(&pscale(&rows[r].rho, &fac)),
            };
        }
        r += 1;
    }
    let kernel = rows.split_off(r);
    (rows, kernel)
}

/// Canonicalize a remainder row against the pure-kernel directions whose
/// remainder is nonzero: those are exactly telescopable residuals, so
/// subtracting them preserves the telescoping identity and the constants
/// while reshaping the remainder. Coordinates (deeper monomials first,
/// higher numerator degrees first, over the lcm denominator per monomial)
/// are eliminated greedily, which leaves the minimal representative of the
/// remainder's class. In particular, when a single-term remainder exists in
/// the class, the reduction finds exactly it.
fn gauge_reduce(mut v: SigVec, kernel: &[SigVec]) -> SigVec {
    let gauge: Vec<&SigVec> = kernel.iter().filter(|k| !k.rho.is_zero()).collect();
    if gauge.is_empty() {
        return v;
    }

    // Common coordinate frame over all remainders in play.
    type Key = (RpDeg, SigDeg);
    let mut dens: BTreeMap<Key, UniPoly> = BTreeMap::new();
    for rho in gauge.iter().map(|k| &k.rho).chain(std::iter::once(&v.rho)) {
        for (m, inner) in &rho.0 {
            for (e, q) in inner {
                if q.is_zero() {
                    continue;
                }
                let entry = dens
                    .entry((m.clone(), e.clone()))
                    .or_insert_with(UniPoly::one);
                *entry = UniPoly::lcm(entry, q.den());
            }
        }
    }
    let lift = |rho: &RingElem| -> BTreeMap<Key, UniPoly> {
        let mut out = BTreeMap::new();
        for (m, inner) in &rho.0 {
            for (e, q) in inner {
                if q.is_zero() {
                    continue;
                }
                let key = (m.clone(), e.clone());
                let den = &dens[&key];
                out.insert(key, q.num().mul(&den.exact_div(q.den())));
            }
        }
        out
    };
    let lifts: Vec<BTreeMap<Key, UniPoly>> =
        gauge.iter().map(|k| lift(&k.rho)).collect();
    let vlift = lift(&v.rho);
    let mut frame: Vec<(Key, usize)> = dens
        .iter()
        .map(|(key, den)| {
            let mut dim = den.degree().unwrap_or(0);
            for l in lifts.iter().chain(std::iter::once(&vlift)) {
                if let Some(p) = l.get(key) {
                    dim = dim.max(p.degree().unwrap_or(0) + 1);
                }
            }
            (key.clone(), dim)
        })
        .collect();
    frame.sort();
    frame.reverse();
    let coords = |l: &BTreeMap<Key, UniPoly>| -> Vec<ParamRat> {
        let mut out = Vec::new();
        for (key, dim) in &frame {
            let p = l.get(key);
            for j in (0..*dim).rev() {
                out.push(p.map_or_else(ParamRat::zero, |p| p.coeff(j)));
            }
        }
        out
    };

    // Mutually reduced pivot set over the gauge directions.
    struct GRow {
        lead: usize,
        co: Vec<ParamRat>,
        g: RingElem,
        rho: RingElem,
    }
    let mut pivots: Vec<GRow> = Vec::new();
    for (k, l) in gauge.iter().zip(&lifts) {
        let mut co = coords(l);
        let mut g = k.g.clone();
        let mut rho = k.rho.clone();
        for p in &pivots {
            let x = co[p.lead].clone();
            if x.is_zero() {
                continue;
            }
            for (a, b) in co.iter_mut().zip(p.co.iter()) {
                *a = a.sub(&b.mul(&x));
            }
            g = g.sub(&pscale(&p.g, &x));
            rho = rho.sub(&pscale(&p.rho, &x));
        }
        let Some(lead) = co.iter().position(|c| !c.is_zero()) else {
            continue;
        };
        let inv = co[lead].recip();
        for a in co.iter_mut() {
            *a = a.mul(&inv);
        }
        let new = GRow {
            lead,
            co,
            g: pscale(&g, &inv),
            rho: pscale(&rho, &inv),
        };
        for p in pivots.iter_mut() {
            let x = p.co[new.lead].clone();
            if x.is_zero() {
                continue;
            }
            for (a, b) in p.co.iter_mut().zip(new.co.iter()) {
                *a = a.sub(&b.mul(&x));
            }
            p.g = p.g.sub(&pscale(&new.g, &x));
            p.rho = p.rho.sub(&pscale(&new.rho, &x));
        }
        pivots.push(new);
    }

    let mut vco = coords(&vlift);
    for p in &pivots {
        let x = vco[p.lead].clone();
        if x.is_zero() {
            continue;
        }
        for (a, b) in vco.iter_mut().zip(p.co.iter()) {
            *a = a.sub(&b.mul(&x));
        }
        v.g = v.g.sub(&pscale(&p.g, &x));
        v.rho = v.rho.sub(&pscale(&p.rho, &x));
    }
    v
}

/// Split a remainder into its leading parameter content gamma and the
/// normalized increment, so rho = gamma * increment with the increment's
/// first coefficient monic.
pub(crate) fn normalize_remainder(rho: &RingElem) -> (ParamRat, RingElem) {
    let gamma = rho
        .0
        .iter()
        .flat_map(|(_, inner)| inner.values())
        .find(|q| !q.is_zero())
        .map(|q| q.num().leading_coeff())
        .expect("zero remainder");
    let inc = pscale(rho, &gamma.recip());
    (gamma, inc)
}

/// First point from which the increment can be unrolled: above the floors of
/// its generators and above every parameter-free integer pole.
pub(crate) fn increment_floor(tower: &Tower, inc: &RingElem) -> i64 {
    let mut f = tower.elem_floor(inc);
    for inner in inc.0.values() {
        for q in inner.values() {
            for r in integer_roots(q.den()) {
                if let Some(x) = r.to_i64() {
                    f = f.max(x + 1);
                }
            }
        }
    }
    f
}

/// True when some generator at or beyond the given product-generator prefix
/// occurs in the element (any sum generator counts: they sit above every
/// product generator in the depth order).
fn uses_gen_at_or_beyond(x: &RingElem, prefix_rp: usize) -> bool {
    for (m, inner) in &x.0 {
        if m.iter().enumerate().any(|(i, &mi)| mi != 0 && i >= prefix_rp) {
            return true;
        }
        for e in inner.keys() {
            if e.iter().any(|&ei| ei != 0) {
                return true;
            }
        }
    }
    false
}

/// The shared remainder ladder: prefixes in the given order, denominator
/// degree ascending; the first admissible candidate wins.
fn remainder_search(
    tower: &Tower,
    f: &[RingElem],
    prefixes: &[usize],
    require_depth: bool,
    require_above: bool,
) -> Option<SigVec> {
    let d = f.len();
    for &prefix in prefixes {
        for dcap in 0..=MAX_DEN_DEG {
            let plan = ResidualPlan { prefix_rp: prefix, max_den_deg: dcap };
            let (rows, kernel) = echelon(sigma_solve(tower, tower.sig.len(), f, Some(&plan)), d);
            let Some(v) = rows.into_iter().next() else {
                continue;
            };
            if v.kappa[0].is_zero() || v.rho.is_zero() {
                continue;
            }
            let v = gauge_reduce(v, &kernel);
            if v.rho.is_zero() {
                // the remainder was exactly telescopable after all; the
                // exact pass already covers this
                continue;
            }
            let comb = combine(f, &v.kappa);
            if require_depth && 1 + v.rho.depth(tower) > comb.depth(tower) {
                continue;
            }
            if require_above && !uses_gen_at_or_beyond(&comb, prefix) {
                continue;
            }
            return Some(v);
        }
    }
    None
}

/// Absorb a chosen remainder: fold it into the certificate when it already
/// telescopes in the tower, otherwise adjoin a new sum generator for it.
fn finish_with_remainder(tower: &mut Tower, v: SigVec) -> RptOutcome {
    let (gamma, inc) = normalize_remainder(&v.rho);
    if let Some(g2) = telescope_in_tower(tower, &inc) {
        let g = v.g.add(&pscale(&g2, &gamma));
        return RptOutcome::Solved(RptSolution {
            c: v.kappa,
            g,
            adjoined: None,
            warnings: Vec::new(),
        });
    }
    let floor = increment_floor(tower, &inc);
    let idx = tower.adjoin_sum(
        inc.clone(),
        GenEval::Unrolled { start: ParamRat::zero() },
        floor,
        ParamRat::zero(),
    );
    let g = v.g.add(&pscale(&RingElem::sig_gen(idx), &gamma));
    RptOutcome::Solved(RptSolution {
        c: v.kappa,
        g,
        adjoined: Some(AdjoinedGen { index: idx, increment: inc }),
        warnings: vec![
            "unverified extension: the adjoined increment did not telescope within the bounded \
             search, but its independence is not certified"
                .to_string(),
        ],
    })
}

/// Parameterized telescoping with the chosen tactic. On success the tower
/// may have gained a sum generator (reported in `adjoined`); on failure it
/// is left unchanged.
pub fn rpt_solve(tower: &mut Tower, f: &[RingElem], tactic: Tactic) -> RptOutcome {
    assert!(!f.is_empty(), "telescoping needs at least one column");
    let d = f.len();
    let (exact, _) = echelon(sigma_solve(tower, tower.sig.len(), f, None), d);
    if let Some(v) = exact.into_iter().next() {
        if !v.kappa[0].is_zero() {
            return RptOutcome::Solved(RptSolution {
                c: v.kappa,
                g: v.g,
                adjoined: None,
                warnings: Vec::new(),
            });
        }
    }
    if tactic == Tactic::Rpt1 {
        return RptOutcome::NoSolution { incomplete: false };
    }

    let rp_len = tower.rp.len();
    // depth-bounded remainder, anywhere in the product-generator span
    if let Some(v) = remainder_search(tower, f, &[rp_len], true, false) {
        return finish_with_remainder(tower, v);
    }
    if tactic == Tactic::Rpt2 {
        return RptOutcome::NoSolution { incomplete: true };
    }

    // shortest-prefix remainder, depth unbounded
    let prefixes: Vec<usize> = (0..=rp_len).collect();
    if let Some(v) = remainder_search(tower, f, &prefixes, false, true) {
        return finish_with_remainder(tower, v);
    }
    if tactic == Tactic::Rpt3 {
        return RptOutcome::NoSolution { incomplete: true };
    }

    // defining fallback: sigma(tau) = tau + f_1
    let inc = f[0].clone();
    assert!(!inc.is_zero(), "zero first column cannot reach the fallback");
    let floor = increment_floor(tower, &inc);
    let idx = tower.adjoin_sum(
        inc.clone(),
        GenEval::Unrolled { start: ParamRat::zero() },
        floor,
        ParamRat::zero(),
    );
    let mut c = vec![ParamRat::zero(); d];
    c[0] = ParamRat::one();
    RptOutcome::Solved(RptSolution {
        c,
        g: RingElem::sig_gen(idx),
        adjoined: Some(AdjoinedGen { index: idx, increment: inc }),
        warnings: vec![
            "unverified extension: the summand itself was adjoined as a new sum generator"
                .to_string(),
        ],
    })
}

/// Single-column exact telescoping: g with sigma(g) - g = phi, if the tower
/// admits one.
pub fn telescope_in_tower(tower: &Tower, phi: &RingElem) -> Option<RingElem> {
    let (rows, _) = echelon(
        sigma_solve(tower, tower.sig.len(), std::slice::from_ref(phi), None),
        1,
    );
    let v = rows.into_iter().next()?;
    if v.kappa[0].is_zero() {
        return None;
    }
    Some(pscale(&v.g, &v.kappa[0].recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use proptest::prelude::*;

    fn k() -> ParamRat {
        ParamRat::var("k")
    }

    fn kshift(a: i64) -> ParamRat {
        k().add(&ParamRat::from_int(a))
    }

    /// k - t + a as a polynomial in t.
    fn k_minus_t_plus(a: i64) -> UniPoly {
        UniPoly::new(vec![kshift(a), ParamRat::from_int(-1)])
    }

    /// c_0 + c_1 k + c_2 k^2 + ...
    fn kpoly(coeffs: &[i64]) -> ParamRat {
        let mut acc = ParamRat::zero();
        let mut p = ParamRat::one();
        for &c in coeffs {
            acc = acc.add(&p.scale(&rat(c)));
            p = p.mul(&k());
        }
        acc
    }

    fn one_over(den: UniPoly) -> RingElem {
        RingElem::from_ratfun(RatFun::new(UniPoly::one(), den))
    }

    /// K(t)[h] with sigma(h) = h + 1/(t+1), modelling harmonic numbers.
    fn harmonic_tower() -> Tower {
        let mut tw = Tower::new();
        let inc = one_over(UniPoly::var_plus(1));
        tw.adjoin_sum(
            inc,
            GenEval::Harmonic { weights: vec![1], scales: vec![rat(1)] },
            0,
            ParamRat::zero(),
        );
        tw
    }

    /// K(k)(t)[b,1/b][h]: sigma(b) = (k-t)/(t+1) b models Binomial[k,t], with
    /// the harmonic generator on top.
    fn binomial_tower() -> Tower {
        let mut tw = Tower::new();
        let ratio = RatFun::new(k_minus_t_plus(0), UniPoly::var_plus(1));
        tw.adjoin_product(ratio, GenEval::Unrolled { start: ParamRat::one() }, 0);
        let inc = one_over(UniPoly::var_plus(1));
        tw.adjoin_sum(
            inc,
            GenEval::Harmonic { weights: vec![1], scales: vec![rat(1)] },
            0,
            ParamRat::zero(),
        );
        tw
    }

    /// f_i = prod_{l=1}^{i-1} (k+l)/(k-t+l) * b * h^2, the parameter-shifted
    /// summand family of Sum[Binomial[k,j] H(j)^2, {j,0,k}].
    fn binomial_columns(d: usize) -> Vec<RingElem> {
        let bh2 = RingElem::monomial(vec![1], vec![2], RatFun::one());
        let mut cols = Vec::new();
        let mut r = RatFun::one();
        for i in 1..=d {
            cols.push(bh2.scale(&r));
            let l = i as i64;
            r = r.mul(&RatFun::new(UniPoly::constant(kshift(l)), k_minus_t_plus(l)));
        }
        cols
    }

    fn assert_telescopes(tower: &Tower, f: &[RingElem], sol: &RptSolution) {
        assert!(!sol.c[0].is_zero(), "first constant must be nonzero");
        let rhs = combine(f, &sol.c);
        let lhs = sol.g.sigma(tower, 1).sub(&sol.g);
        assert_eq!(lhs, rhs, "certificate fails its defining identity");
    }

    fn assert_proportional(actual: &[ParamRat], expected: &[ParamRat]) {
        assert_eq!(actual.len(), expected.len());
        for i in 1..actual.len() {
            assert_eq!(
                actual[i].mul(&expected[0]),
                actual[0].mul(&expected[i]),
                "constant {} breaks proportionality",
                i + 1
            );
        }
    }

    #[test]
    fn plain_rational_summand_telescopes() {
        let mut tw = Tower::new();
        let f = vec![one_over(UniPoly::var().mul(&UniPoly::var_plus(1)))];
        match rpt_solve(&mut tw, &f, Tactic::Rpt1) {
            RptOutcome::Solved(s) => {
                assert!(s.adjoined.is_none());
                assert_telescopes(&tw, &f, &s);
            }
            _ => panic!("1/(t(t+1)) must telescope rationally"),
        }
    }

    #[test]
    fn harmonic_increment_needs_its_generator() {
        let f = vec![one_over(UniPoly::var_plus(1))];
        let mut plain = Tower::new();
        match rpt_solve(&mut plain, &f, Tactic::Rpt1) {
            RptOutcome::NoSolution { incomplete } => assert!(!incomplete),
            _ => panic!("1/(t+1) has no rational telescoper"),
        }
        let mut tw = harmonic_tower();
        match rpt_solve(&mut tw, &f, Tactic::Rpt1) {
            RptOutcome::Solved(s) => {
                assert!(s.adjoined.is_none());
                assert_eq!(s.g.sig_degree_in(0), 1, "certificate should be linear in h");
                assert_telescopes(&tw, &f, &s);
            }
            _ => panic!("1/(t+1) telescopes through the harmonic generator"),
        }
    }

    #[test]
    fn harmonic_times_increment_adjoins_weight_two() {
        // sigma(g) - g = h/(t+1) forces the weight-two tail 1/(t+1)^2
        let f = vec![RingElem::monomial(Vec::new(), vec![1], RatFun::new(UniPoly::one(), UniPoly::var_plus(1)))];
        let mut tw = harmonic_tower();
        match rpt_solve(&mut tw, &f, Tactic::Rpt1) {
            RptOutcome::NoSolution { .. } => {}
            _ => panic!("h/(t+1) must not telescope in K(t)[h]"),
        }
        let mut tw = harmonic_tower();
        match rpt_solve(&mut tw, &f, Tactic::Rpt2) {
            RptOutcome::Solved(s) => {
                let adj = s.adjoined.as_ref().expect("a new generator is required");
                assert_eq!(adj.increment, one_over(UniPoly::var_plus(1).pow(2)));
                assert_eq!(tw.sig[adj.index].depth, 2, "weight-two tail stays at depth two");
                assert!(!s.warnings.is_empty());
                assert_telescopes(&tw, &f, &s);
            }
            _ => panic!("the depth-bounded tactic handles h/(t+1)"),
        }
    }

    #[test]
    fn width_five_telescopes_exactly() {
        let mut tw = binomial_tower();
        let f = binomial_columns(5);
        match rpt_solve(&mut tw, &f, Tactic::Rpt1) {
            RptOutcome::Solved(s) => {
                assert!(s.adjoined.is_none());
                assert_telescopes(&tw, &f, &s);
                let expected = vec![
                    kpoly(&[-24, -32, -8]),  // -8(1+k)(3+k)
                    kpoly(&[116, 100, 20]),  // 4(29+25k+5k^2)
                    kpoly(&[-160, -108, -18]), // -2(8+3k)(10+3k)
                    kpoly(&[86, 49, 7]),
                    kpoly(&[-16, -8, -1]), // -(4+k)^2
                ];
                assert_proportional(&s.c, &expected);
            }
            _ => panic!("five shifted columns admit an exact telescoper"),
        }
    }

    #[test]
    fn width_three_adjoins_minimal_sum() {
        let f = binomial_columns(3);

        let mut tw = binomial_tower();
        match rpt_solve(&mut tw, &f, Tactic::Rpt1) {
            RptOutcome::NoSolution { incomplete } => assert!(!incomplete),
            _ => panic!("three columns have no exact telescoper"),
        }

        // the minimal increment is deeper than the summand, so the
        // depth-bounded tactic must pass
        let mut tw = binomial_tower();
        match rpt_solve(&mut tw, &f, Tactic::Rpt2) {
            RptOutcome::NoSolution { incomplete } => assert!(incomplete),
            _ => panic!("the depth-bounded tactic cannot absorb the remainder"),
        }

        let mut tw = binomial_tower();
        match rpt_solve(&mut tw, &f, Tactic::Rpt3) {
            RptOutcome::Solved(s) => {
                let adj = s.adjoined.as_ref().expect("a new generator is required");
                // increment b/((t+1)^2 (t-k-1)), normalized monic
                let den = UniPoly::var_plus(1).pow(2).mul(&k_minus_t_plus(1).neg());
                let expected = RingElem::monomial(vec![1], Vec::new(), RatFun::new(UniPoly::one(), den));
                assert_eq!(adj.increment, expected);
                assert_telescopes(&tw, &f, &s);
                let expected_c = vec![
                    kpoly(&[-4, -4]), // -4(1+k)
                    kpoly(&[6, 4]),   // 2(3+2k)
                    kpoly(&[-2, -1]), // -(2+k)
                ];
                assert_proportional(&s.c, &expected_c);
            }
            _ => panic!("the prefix tactic resolves three columns"),
        }
    }

    #[test]
    fn defining_fallback_takes_the_summand() {
        let b = RingElem::rp_gen(0);
        let f = vec![b.clone()];

        let mut tw = binomial_tower();
        match rpt_solve(&mut tw, &f, Tactic::Rpt3) {
            RptOutcome::NoSolution { incomplete } => assert!(incomplete),
            _ => panic!("a bare product generator has no remainder decomposition"),
        }

        let mut tw = binomial_tower();
        match rpt_solve(&mut tw, &f, Tactic::Rpt4) {
            RptOutcome::Solved(s) => {
                let adj = s.adjoined.as_ref().expect("the fallback adjoins");
                assert_eq!(adj.increment, b);
                assert_eq!(s.c, vec![ParamRat::one()]);
                assert_eq!(s.g, RingElem::sig_gen(adj.index));
                assert!(!s.warnings.is_empty());
                assert_telescopes(&tw, &f, &s);
            }
            _ => panic!("the defining fallback never fails"),
        }
    }

    #[test]
    fn single_column_wrapper_matches_tactic_one() {
        let tw = harmonic_tower();
        let phi = one_over(UniPoly::var_plus(1));
        let g = telescope_in_tower(&tw, &phi).expect("harmonic increment telescopes");
        assert_eq!(g.sigma(&tw, 1).sub(&g), phi);

        let tw = binomial_tower();
        assert!(telescope_in_tower(&tw, &RingElem::rp_gen(0)).is_none());
    }

    #[test]
    fn divisor_lattice_separates_multiplicity_and_orbits() {
        // (t+1)^2 (t+3): multiplicity separates the blocks
        let den = UniPoly::var_plus(1).pow(2).mul(&UniPoly::var_plus(3));
        let cands = divisor_candidates(&den);
        assert_eq!(cands.len(), 5);
        assert!(cands.contains(&UniPoly::var_plus(1)));
        assert!(cands.contains(&UniPoly::var_plus(3)));
        assert!(cands.contains(&UniPoly::var_plus(1).pow(2)));
        assert!(cands.contains(&den.monic()));

        // (t+1)(t+4): same multiplicity, split by the shift orbit
        let den = UniPoly::var_plus(1).mul(&UniPoly::var_plus(4));
        let cands = divisor_candidates(&den);
        assert_eq!(cands.len(), 3);
        assert!(cands.contains(&UniPoly::var_plus(1)));
        assert!(cands.contains(&UniPoly::var_plus(4)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn exact_certificates_verify(c0 in -5i64..=5, c1 in -5i64..=5, a in 0i64..=3, b in 0i64..=3) {
            let num = UniPoly::new(vec![ParamRat::from_int(c0), ParamRat::from_int(c1)]);
            prop_assume!(!num.is_zero());
            let den = UniPoly::var_plus(a).mul(&UniPoly::var_plus(b));
            let f = vec![RingElem::from_ratfun(RatFun::new(num, den))];
            let mut tw = Tower::new();
            if let RptOutcome::Solved(s) = rpt_solve(&mut tw, &f, Tactic::Rpt1) {
                prop_assert!(!s.c[0].is_zero());
                let lhs = s.g.sigma(&tw, 1).sub(&s.g);
                prop_assert_eq!(lhs, combine(&f, &s.c));
            }
        }
    }
}
