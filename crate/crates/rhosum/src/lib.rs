//! Exact symbolic summation over difference-ring towers.
//!
//! This crate finds linear recurrences (with exactly computed rational
//! coefficients) satisfied by definite nested sums such as
//!
//! ```text
//! S(n) = Sum[Binomial[n,k] * Sum[Binomial[k,j] * S[1,j]^2, {j,0,k}], {k,0,n}]
//! ```
//!
//! by parameterized telescoping: the summand and its parameter shifts are
//! represented in a tower of difference rings built over K(t) with the shift
//! automorphism sigma(t) = t + 1, where each generator models a product or
//! sum from the input (binomials, powers, harmonic-type sums). A telescoper
//! sigma(g) - g = c1*f1 + ... + cd*fd with constants ci in K then sums to a
//! recurrence for the definite sum, and the certificate g makes every result
//! independently checkable, both symbolically and at exact sample points.
//!
//! The layers, from the ground up:
//!
//! * [`rat`], [`param`], [`poly`]: exact arithmetic. Rationals, multivariate
//!   rational functions in the free parameters, univariate polynomials and
//!   rational functions in t with shift, gcd, resultant, and dispersion.
//! * [`expr`]: the input language. Parsing, exact evaluation, and parameter
//!   shifts of nested-sum expressions.
//! * [`ring`]: difference-ring towers and the translation of summands into
//!   them.
//! * [`linalg`]: dense exact linear algebra used by the solvers.
//! * [`prs`]: parameterized recurrence solving in K(t): universal
//!   denominators, degree bounds, and the solution-space basis.
//! * [`rpt`]: refined parameterized telescoping in a tower, with the
//!   escalation tactics that trade ring growth for solvability.
//! * [`hol`]: telescoping over towers extended by a higher-order linear
//!   sequence, order reduction, and closed-form extraction.
//! * [`multisum`]: the layer-by-layer pipeline that turns a nested definite
//!   sum into one recurrence, with boundary handling and right-hand-side
//!   simplification.
//! * [`report`], [`cli`]: verification reports, canonical output formats,
//!   and the command-line entry points.

pub mod expr;
pub mod hol;
pub mod linalg;
pub mod ring;
pub mod param;
pub mod poly;
pub mod prs;
pub mod rat;
pub mod rpt;
