//! Parameterized rational solutions of linear difference equations.
//!
//! The problem: given operator coefficients a_0..a_m in K(t) and columns
//! phi_1..phi_d over the product-monomial module, find every pair of a
//! constant vector (c_1..c_d) and a module element w with
//!
//!     a_0 w + a_1 sigma(w) + ... + a_m sigma^m(w) = c_1 phi_1 + ... + c_d phi_d.
//!
//! Writing w = sum_D w_D B^D over the product monomials B^D, the equation
//! splits into one scalar problem per monomial, with the operator twisted by
//! the shift factor of B^D; the constants couple the scalar problems, so a
//! single combined linear system is built and its nullspace returned.
//!
//! Each scalar problem is reduced to polynomial unknowns in two classical
//! steps: a universal denominator bound (from the leading and trailing
//! operator coefficients, via dispersions), and a degree bound (from the
//! indicial analysis of the cleared operator). Undetermined coefficients
//! then turn the whole thing into exact linear algebra over the parameter
//! field.

use crate::linalg::Matrix;
use crate::param::ParamRat;
use crate::poly::{dispersion_set, integer_roots, RatFun, UniPoly};
use crate::rat::rat;
use crate::ring::RpDeg;
use num::ToPrimitive;
use std::collections::BTreeMap;

/// One product-monomial component of a PRS problem.
#[derive(Clone, Debug)]
pub struct PrsComponent {
    /// The monomial's multidegree key (empty for the rational component).
    pub deg: RpDeg,
    /// sigma(B^D) = sigma_factor * B^D.
    pub sigma_factor: RatFun,
    /// The d right-hand-side columns restricted to this component.
    pub rhs: Vec<RatFun>,
}

#[derive(Clone, Debug)]
pub struct PrsInput {
    /// a_0..a_m; the last entry must be nonzero.
    pub op: Vec<RatFun>,
    /// Number of columns d (every component carries exactly d entries).
    pub d: usize,
    pub components: Vec<PrsComponent>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrsSolution {
    pub c: Vec<ParamRat>,
    pub w: BTreeMap<RpDeg, RatFun>,
    /// Unresolved remainder per component; empty unless the solve was asked
    /// to admit one (see `prs_solve_residual`).
    pub rho: BTreeMap<RpDeg, RatFun>,
}

/// Basis of the solution space, echelon-normalized over the coordinate
/// order (c_1..c_d, then the undetermined coefficients component by
/// component).
pub fn prs_solve(input: &PrsInput) -> Vec<PrsSolution> {
    solve_core(input, &BTreeMap::new())
}

/// Like `prs_solve`, but additionally admits an unresolved remainder rho on
/// the listed components, with denominator among the given candidates:
///
///     a_0 w + ... + a_m sigma^m(w) + rho = c_1 phi_1 + ... + c_d phi_d.
///
/// Proper parts only: each candidate denominator q contributes numerator
/// ansatz degrees < deg q. The remainder space widens the solution space, so
/// callers restrict the candidates (and escalate) when a minimal remainder
/// is wanted.
pub fn prs_solve_residual(
    input: &PrsInput,
    candidates: &BTreeMap<RpDeg, Vec<UniPoly>>,
) -> Vec<PrsSolution> {
    solve_core(input, candidates)
}

fn solve_core(input: &PrsInput, rho_spec: &BTreeMap<RpDeg, Vec<UniPoly>>) -> Vec<PrsSolution> {
    assert!(
        input.op.last().map_or(false, |a| !a.is_zero()),
        "operator with zero leading coefficient"
    );
    for comp in &input.components {
        assert_eq!(comp.rhs.len(), input.d, "component column count mismatch");
        assert!(!comp.sigma_factor.is_zero(), "shift factor must be a unit");
    }

    // Per component: reduce to polynomial unknowns z with w = (z/u) shifted,
    // plus optional remainder unknowns y with rho = sum_s y_s t^s / q_cand.
    struct Scalar {
        deg: RpDeg,
        p_hat: Vec<UniPoly>,
        q_hat: Vec<UniPoly>,
        u: UniPoly,
        back_shift: i64,
        z_len: usize, // number of coefficient unknowns (degree bound + 1)
        // per remainder candidate: denominator and the cleared column
        // polynomial multiplying each numerator coefficient t^s
        rho_cols: Vec<(UniPoly, Vec<UniPoly>)>,
    }

    let mut scalars = Vec::new();
    for comp in &input.components {
        let cands = rho_spec.get(&comp.deg).cloned().unwrap_or_default();
        // twist: a_i * prod_{l<i} sigma^l(sigma_factor)
        let mut twisted: Vec<RatFun> = Vec::with_capacity(input.op.len());
        let mut rfac = RatFun::one();
        for (i, a) in input.op.iter().enumerate() {
            twisted.push(a.mul(&rfac));
            if i + 1 < input.op.len() {
                rfac = rfac.mul(&comp.sigma_factor.shift(i as i64));
            }
        }
        // strip leading zero coefficients: solve for v = sigma^{i0}(w)
        let i0 = twisted
            .iter()
            .position(|a| !a.is_zero())
            .expect("zero operator");
        let twisted = &twisted[i0..];
        let m = twisted.len() - 1;

        // clear denominators
        let mut lcm = UniPoly::one();
        for a in twisted {
            lcm = UniPoly::lcm(&lcm, a.den());
        }
        for q in &comp.rhs {
            lcm = UniPoly::lcm(&lcm, q.den());
        }
        for cand in &cands {
            lcm = UniPoly::lcm(&lcm, cand);
        }
        let clear = |r: &RatFun| -> UniPoly {
            let s = r.mul(&RatFun::from_poly(lcm.clone()));
            assert_eq!(s.den().degree(), Some(0), "clearing failed");
            s.num().scale(&s.den().leading_coeff().recip())
        };
        let p: Vec<UniPoly> = twisted.iter().map(&clear).collect();
        let q: Vec<UniPoly> = comp.rhs.iter().map(&clear).collect();

        let (p_hat, q_hat, u, dl) = if m == 0 {
            // a_0 w = rhs: w = rhs / a_0 directly, expressed through z = w * 1
            (p.clone(), q.clone(), UniPoly::one(), UniPoly::one())
        } else {
            let u = universal_denominator(&p[0], &p[m], m as i64);
            // substitute w-scalar = z/u and clear u(t+i)
            let mut dl = UniPoly::one();
            for i in 0..=m {
                dl = UniPoly::lcm(&dl, &u.shift(i as i64));
            }
            let p_hat: Vec<UniPoly> = p
                .iter()
                .enumerate()
                .map(|(i, pi)| pi.mul(&dl.exact_div(&u.shift(i as i64))))
                .collect();
            let q_hat: Vec<UniPoly> = q.iter().map(|qi| qi.mul(&dl)).collect();
            (p_hat, q_hat, u, dl)
        };

        // remainder columns enter the cleared equation as dl*(lcm/q_cand)*t^s
        let mut rho_cols = Vec::new();
        for cand in &cands {
            let len = cand.degree().unwrap_or(0);
            if len == 0 {
                continue;
            }
            let base = dl.mul(&lcm.exact_div(cand));
            let cols: Vec<UniPoly> = (0..len).map(|s| base.mul_xk(s)).collect();
            rho_cols.push((cand.clone(), cols));
        }

        // the remainder columns act like extra right-hand sides for the
        // degree analysis of z
        let mut q_for_bound = q_hat.clone();
        for (_, cols) in &rho_cols {
            q_for_bound.extend(cols.iter().cloned());
        }
        let bound = degree_bound(&p_hat, &q_for_bound, m);
        scalars.push(Scalar {
            deg: comp.deg.clone(),
            p_hat,
            q_hat,
            u,
            back_shift: -(i0 as i64),
            z_len: bound.map_or(0, |b| b + 1),
            rho_cols,
        });
    }

    // Combined linear system over the parameter field. Unknowns:
    // [c_1..c_d | rho and z coefficients of component 1 | ... ].
    let total_extra: usize = scalars
        .iter()
        .map(|s| s.z_len + s.rho_cols.iter().map(|(_, c)| c.len()).sum::<usize>())
        .sum();
    let ncols = input.d + total_extra;
    let mut rows: Vec<Vec<ParamRat>> = Vec::new();
    let mut extra_base = input.d;
    for sc in &scalars {
        // column polynomials: for y_s: the cleared remainder columns; for
        // z_s: sum_i p_hat_i (t+i)^s; for c_j: -q_hat_j
        let mut col_poly: Vec<(usize, UniPoly)> = Vec::new();
        for (j, qh) in sc.q_hat.iter().enumerate() {
            col_poly.push((j, qh.neg()));
        }
        let mut at = extra_base;
        for (_, cols) in &sc.rho_cols {
            for cp in cols {
                col_poly.push((at, cp.clone()));
                at += 1;
            }
        }
        // z coefficients enter highest degree first, so the echelon pass
        // below reduces by leading terms, the way polynomials are reduced.
        for s in 0..sc.z_len {
            let power = (sc.z_len - 1 - s) as u32;
            let mut acc = UniPoly::zero();
            for (i, ph) in sc.p_hat.iter().enumerate() {
                acc = acc.add(&ph.mul(&UniPoly::var_plus(i as i64).pow(power)));
            }
            col_poly.push((at + s, acc));
        }
        let height = col_poly
            .iter()
            .map(|(_, p)| p.degree_i() + 1)
            .max()
            .unwrap_or(0)
            .max(0) as usize;
        for power in 0..height {
            let mut row = vec![ParamRat::zero(); ncols];
            for (col, poly) in &col_poly {
                row[*col] = poly.coeff(power);
            }
            rows.push(row);
        }
        extra_base = at + sc.z_len;
    }

    let basis = if rows.is_empty() {
        // no constraints at all: identity choices
        let mut b = Vec::new();
        for i in 0..ncols {
            let mut v = vec![ParamRat::zero(); ncols];
            v[i] = ParamRat::one();
            b.push(v);
        }
        b
    } else {
        Matrix::from_rows(rows).nullspace()
    };

    // Echelonize the basis over the (c | z) coordinates for a canonical
    // presentation.
    let canon = if basis.is_empty() {
        Vec::new()
    } else {
        let mut m = Matrix::from_rows(basis);
        m.rref();
        (0..m.rows)
            .map(|i| m.row(i).to_vec())
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect::<Vec<_>>()
    };

    canon
        .into_iter()
        .map(|v| {
            let c = v[..input.d].to_vec();
            let mut w = BTreeMap::new();
            let mut rho = BTreeMap::new();
            let mut base = input.d;
            for sc in &scalars {
                let mut r = RatFun::zero();
                for (cand, cols) in &sc.rho_cols {
                    let mut num = UniPoly::zero();
                    for s in 0..cols.len() {
                        let coef = v[base + s].clone();
                        if !coef.is_zero() {
                            num = num.add(&UniPoly::var().pow(s as u32).scale(&coef));
                        }
                    }
                    base += cols.len();
                    if !num.is_zero() {
                        r = r.add(&RatFun::new(num, cand.clone()));
                    }
                }
                if !r.is_zero() {
                    rho.insert(sc.deg.clone(), r);
                }
                let mut z = UniPoly::zero();
                for s in 0..sc.z_len {
                    let coef = v[base + s].clone();
                    if !coef.is_zero() {
                        let power = (sc.z_len - 1 - s) as u32;
                        z = z.add(&UniPoly::var().pow(power).scale(&coef));
                    }
                }
                base += sc.z_len;
                if !z.is_zero() {
                    let ws = RatFun::new(z, sc.u.clone()).shift(sc.back_shift);
                    w.insert(sc.deg.clone(), ws);
                }
            }
            PrsSolution { c, w, rho }
        })
        .collect()
}

/// Abramov's universal denominator for sum_i p_i(t) z(t+i) = q(t): every
/// rational solution has denominator dividing the result.
pub fn universal_denominator(p0: &UniPoly, pm: &UniPoly, m: i64) -> UniPoly {
    let mut a = pm.shift(-m);
    let mut b = p0.clone();
    let mut u = UniPoly::one();
    if a.degree().map_or(true, |d| d == 0) || b.degree().map_or(true, |d| d == 0) {
        return u;
    }
    let hs = dispersion_set(&a, &b);
    let hmax = match hs.last() {
        Some(&h) => h as i64,
        None => return u,
    };
    for h in (0..=hmax).rev() {
        let g = UniPoly::gcd(&a, &b.shift(h));
        if g.degree().map_or(true, |d| d == 0) {
            continue;
        }
        a = a.exact_div(&g);
        b = b.exact_div(&g.shift(-h));
        for i in 0..=h {
            u = u.mul(&g.shift(-i));
        }
    }
    u
}

/// Degree bound for polynomial solutions z of sum_i p_i z(t+i) = q (any
/// constant combination of the columns q). None means only z = 0 fits.
pub fn degree_bound(p_hat: &[UniPoly], q_hat: &[UniPoly], m: usize) -> Option<usize> {
    let d_star = p_hat.iter().map(|p| p.degree_i()).max().unwrap_or(-1);
    if d_star < 0 {
        return None; // zero operator cannot happen; defensive
    }
    // c_j(D) = sum_i sum_{l+r=j} [t^{d*-l}] p_i * C(D,r) * i^r, a polynomial
    // in the degree D; the first nonvanishing one controls the image degree.
    let mut j0 = None;
    let j_cap = (d_star as usize) + 2 * m + 8;
    let mut c_j0 = UniPoly::zero();
    for j in 0..=j_cap {
        let mut cj = UniPoly::zero();
        for (i, p) in p_hat.iter().enumerate() {
            for l in 0..=j.min(d_star as usize) {
                let r = j - l;
                let lead = p.coeff((d_star as usize) - l);
                if lead.is_zero() {
                    continue;
                }
                // C(D, r) * i^r as a polynomial in D
                let mut binom = UniPoly::one();
                for s in 0..r {
                    binom = binom.mul(&UniPoly::new(vec![
                        ParamRat::constant(rat(-(s as i64))),
                        ParamRat::one(),
                    ]));
                }
                let ir = rat((i as i64).pow(r as u32)) / crate::rat::factorial(r as i64);
                cj = cj.add(&binom.scale(&lead.scale(&ir)));
            }
        }
        if !cj.is_zero() {
            j0 = Some(j);
            c_j0 = cj;
            break;
        }
    }
    let mut best: i64 = -1;
    match j0 {
        Some(j0) => {
            for q in q_hat {
                if !q.is_zero() {
                    best = best.max(q.degree_i() - d_star + j0 as i64);
                }
            }
            for r in integer_roots(&c_j0) {
                if let Some(x) = r.to_i64() {
                    if x >= 0 {
                        best = best.max(x);
                    }
                }
            }
        }
        None => {
            // no indicial control found; fall back to a generous cap
            for q in q_hat {
                best = best.max(q.degree_i() + 2 * m as i64 + 8);
            }
        }
    }
    if best < 0 {
        None
    } else {
        Some(best as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;

    fn t() -> UniPoly {
        UniPoly::var()
    }

    fn telescoping_op() -> Vec<RatFun> {
        vec![RatFun::from_int(-1), RatFun::from_int(1)]
    }

    fn rational_component(rhs: Vec<RatFun>) -> PrsComponent {
        PrsComponent {
            deg: Vec::new(),
            sigma_factor: RatFun::one(),
            rhs,
        }
    }

    fn check(input: &PrsInput, sol: &PrsSolution) {
        // verify sum_i a_i sigma^i(w_D) * rfac = sum_j c_j phi_{j,D} per D
        for comp in &input.components {
            let w = sol.w.get(&comp.deg).cloned().unwrap_or_else(RatFun::zero);
            let mut lhs = RatFun::zero();
            let mut rfac = RatFun::one();
            for (i, a) in input.op.iter().enumerate() {
                lhs = lhs.add(&a.mul(&rfac).mul(&w.shift(i as i64)));
                rfac = rfac.mul(&comp.sigma_factor.shift(i as i64));
            }
            let mut rhs = RatFun::zero();
            for (j, phi) in comp.rhs.iter().enumerate() {
                rhs = rhs.add(&phi.scale(&sol.c[j]));
            }
            assert_eq!(lhs, rhs, "solution fails on component {:?}", comp.deg);
        }
        // w components outside the input's component list must be absent
        for d in sol.w.keys() {
            assert!(input.components.iter().any(|c| &c.deg == d));
        }
    }

    #[test]
    fn telescopes_partial_fraction_target() {
        // sigma(g) - g = 1/(t(t+1)) has g = -1/t; plus the constant kernel
        let phi = RatFun::one().div(&RatFun::from_poly(t().mul(&UniPoly::var_plus(1))));
        let input = PrsInput {
            op: telescoping_op(),
            d: 1,
            components: vec![rational_component(vec![phi])],
        };
        let sols = prs_solve(&input);
        assert_eq!(sols.len(), 2);
        for s in &sols {
            check(&input, s);
        }
        // one vector telescopes with nonzero c
        let hit = sols.iter().find(|s| !s.c[0].is_zero()).unwrap();
        let w = hit.w.get(&Vec::new()).unwrap();
        let expect = RatFun::one()
            .div(&RatFun::from_poly(t()))
            .neg()
            .scale(&hit.c[0]);
        // w may differ from -c/t by an additive constant (kernel direction)
        let diff = w.sub(&expect);
        assert!(diff.den().degree() == Some(0) && diff.num().degree_i() <= 0);
    }

    #[test]
    fn twisted_component_geometric() {
        // with sigma(b) = 2b: solve sigma(w b) - w b = b, i.e. 2 sigma(w) - w = 1
        let input = PrsInput {
            op: telescoping_op(),
            d: 1,
            components: vec![PrsComponent {
                deg: vec![1],
                sigma_factor: RatFun::from_int(2),
                rhs: vec![RatFun::one()],
            }],
        };
        let sols = prs_solve(&input);
        assert_eq!(sols.len(), 1);
        check(&input, &sols[0]);
        assert!(!sols[0].c[0].is_zero());
        let w = sols[0].w.get(&vec![1]).unwrap();
        assert_eq!(w, &RatFun::from_const(sols[0].c[0].clone()));
    }

    #[test]
    fn harmonic_target_has_no_telescoper() {
        // sigma(g) - g = 1/t has no rational solution: only the kernel
        let phi = RatFun::one().div(&RatFun::from_poly(t()));
        let input = PrsInput {
            op: telescoping_op(),
            d: 1,
            components: vec![rational_component(vec![phi])],
        };
        let sols = prs_solve(&input);
        for s in &sols {
            check(&input, s);
            assert!(s.c[0].is_zero(), "no constant choice can telescope 1/t");
        }
        assert_eq!(sols.len(), 1); // the constant kernel survives
    }

    #[test]
    fn binomial_twist_has_empty_space() {
        // sigma(b) = (n-t)/(t+1) b models C(n, k); sum of C(n,k) over k has
        // no product-module telescoper, and the twisted kernel is empty too.
        let nm = UniPoly::new(vec![ParamRat::var("n"), ParamRat::from_int(-1)]);
        let fac = RatFun::new(nm, UniPoly::var_plus(1));
        let input = PrsInput {
            op: telescoping_op(),
            d: 1,
            components: vec![PrsComponent {
                deg: vec![1],
                sigma_factor: fac,
                rhs: vec![RatFun::one()],
            }],
        };
        let sols = prs_solve(&input);
        assert!(sols.is_empty());
    }

    #[test]
    fn shared_constants_couple_components() {
        // one column with support on two components: the rational part
        // demands c, the twisted part must follow with the same c.
        // rational part: sigma(w) - w = c * 1 (solvable: w = c t)
        // twisted by 2: 2 sigma(w') - w' = c * 3 (solvable: w' = 3c)
        let input = PrsInput {
            op: telescoping_op(),
            d: 1,
            components: vec![
                rational_component(vec![RatFun::one()]),
                PrsComponent {
                    deg: vec![1],
                    sigma_factor: RatFun::from_int(2),
                    rhs: vec![RatFun::from_int(3)],
                },
            ],
        };
        let sols = prs_solve(&input);
        for s in &sols {
            check(&input, s);
        }
        let hit = sols.iter().find(|s| !s.c[0].is_zero()).unwrap();
        let w1 = hit.w.get(&vec![1]).unwrap();
        assert_eq!(
            w1,
            &RatFun::from_const(hit.c[0].clone()).scale(&ParamRat::from_int(3))
        );
    }

    #[test]
    fn universal_denominator_covers_solution() {
        // sigma(g) - g = 1/(t(t+2)): g = -(1/2)(1/t + 1/(t+1)), denominator
        // t(t+1) must divide the Abramov bound.
        let den = t().mul(&UniPoly::var_plus(2));
        let p1 = den.clone();
        let p0 = den.neg();
        let u = universal_denominator(&p0, &p1, 1);
        let expect = t().mul(&UniPoly::var_plus(1));
        assert_eq!(u.rem(&expect), UniPoly::zero());
        // and the full solver finds it
        let phi = RatFun::one().div(&RatFun::from_poly(den));
        let input = PrsInput {
            op: telescoping_op(),
            d: 1,
            components: vec![rational_component(vec![phi])],
        };
        let sols = prs_solve(&input);
        let hit = sols.iter().find(|s| !s.c[0].is_zero()).unwrap();
        check(&input, hit);
        let w = hit.w.get(&Vec::new()).unwrap();
        let g = RatFun::one()
            .div(&RatFun::from_poly(t()))
            .add(&RatFun::one().div(&RatFun::from_poly(UniPoly::var_plus(1))))
            .scale(&ParamRat::constant(rat_frac(-1, 2)));
        let diff = w.sub(&g.scale(&hit.c[0]));
        assert!(diff.den().degree() == Some(0) && diff.num().degree_i() <= 0);
    }
}
