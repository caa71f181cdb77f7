//! Sparse multivariate polynomials over exchangeable coefficient backends.
//!
//! The same representation runs exact (arbitrary-precision rationals, used by
//! the continuity systems and the module Groebner lane) and floating point
//! (used by the numeric optimization lane). Terms live in a BTreeMap keyed by
//! dense exponent vectors, so iteration order — and everything downstream,
//! serialization included — is deterministic. Zero coefficients are never
//! stored; the zero polynomial has no terms and reports `degree() == None`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::qlin;

/// Dense exponent vector; index = variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn unit(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.0.len(), other.0.len());
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// other / self, assuming divisibility.
    pub fn div_into(&self, other: &Monomial) -> Monomial {
        Monomial(
            other
                .0
                .iter()
                .zip(self.0.iter())
                .map(|(b, a)| b - a)
                .collect(),
        )
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }
}

/// Graded reverse lexicographic order: total degree first, ties broken by
/// the last nonzero entry of the exponent difference being negative.
pub fn grevlex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    let (da, db) = (a.total_degree(), b.total_degree());
    if da != db {
        return da.cmp(&db);
    }
    for i in (0..a.0.len()).rev() {
        let d = a.0[i] as i64 - b.0[i] as i64;
        if d != 0 {
            // larger element has the *smaller* trailing exponent
            return if d < 0 { Ordering::Greater } else { Ordering::Less };
        }
    }
    Ordering::Equal
}

/// Plain lexicographic order, first variable strongest.
pub fn lex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    for i in 0..a.0.len() {
        let d = a.0[i] as i64 - b.0[i] as i64;
        if d != 0 {
            return if d > 0 { Ordering::Greater } else { Ordering::Less };
        }
    }
    Ordering::Equal
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    Grevlex,
    Lex,
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Grevlex => grevlex_cmp(a, b),
            MonomialOrder::Lex => lex_cmp(a, b),
        }
    }
}

/// All monomials in `nvars` variables with total degree <= `max_degree`,
/// in a fixed (degree, then lex) order.
pub fn monomials_up_to(nvars: usize, max_degree: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nvars];
    fn rec(out: &mut Vec<Monomial>, current: &mut Vec<u32>, var: usize, left: usize) {
        if var == current.len() {
            out.push(Monomial(current.clone()));
            return;
        }
        for e in 0..=left {
            current[var] = e as u32;
            rec(out, current, var + 1, left - e);
        }
        current[var] = 0;
    }
    rec(&mut out, &mut current, 0, max_degree);
    out.sort_by(|a, b| {
        (a.total_degree(), &a.0).cmp(&(b.total_degree(), &b.0))
    });
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Coefficient backend: exact rationals or f64.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Human-readable form for [`fmt::Display`] of polynomials.
    fn fmt_coeff(&self) -> String;
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn to_f64(&self) -> f64 {
        qlin::qto_f64(self)
    }
    fn fmt_coeff(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn fmt_coeff(&self) -> String {
        self.to_string()
    }
}

/// Sparse polynomial; `nvars` is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

pub type QPoly = SparsePoly<BigRational>;
pub type FPoly = SparsePoly<f64>;

impl<C: Coeff> SparsePoly<C> {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::unit(nvars), c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(nvars, i), C::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// None for the zero polynomial (the -infinity sentinel).
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in other.terms.iter() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            out.terms.insert(m.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        for (m, v) in self.terms.iter() {
            out.terms.insert(m.clone(), v.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in other.terms.iter() {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn mul_term(&self, m: &Monomial, c: &C) -> Self {
        let mut out = Self::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        for (ma, ca) in self.terms.iter() {
            out.terms.insert(ma.mul(m), ca.mul(c));
        }
        out
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::constant(self.nvars, C::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.nvars);
        let mut acc = C::zero();
        for (m, c) in self.terms.iter() {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&point[i]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc = 0.0;
        for (m, c) in self.terms.iter() {
            let mut t = c.to_f64();
            for (i, &e) in m.0.iter().enumerate() {
                t *= point[i].powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn partial(&self, var: usize) -> Self {
        assert!(var < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut me = m.clone();
            me.0[var] -= 1;
            out.add_term(me, c.mul(&C::from_i64(e as i64)));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    /// Substitute exprs[i] (a polynomial in the target variables) for
    /// variable i. Powers are memoized per variable.
    pub fn substitute(&self, exprs: &[Self]) -> Self {
        assert_eq!(exprs.len(), self.nvars);
        let target_nvars = exprs.first().map_or(0, |e| e.nvars);
        for e in exprs {
            assert_eq!(e.nvars, target_nvars);
        }
        let mut powers: Vec<Vec<Self>> = exprs
            .iter()
            .map(|e| vec![Self::constant(target_nvars, C::one()), e.clone()])
            .collect();
        let mut out = Self::zero(target_nvars);
        for (m, c) in self.terms.iter() {
            let mut t = Self::constant(target_nvars, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                let e = e as usize;
                while powers[i].len() <= e {
                    let next = powers[i].last().unwrap().mul(&exprs[i]);
                    powers[i].push(next);
                }
                if e > 0 {
                    t = t.mul(&powers[i][e]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Restrict onto the span of `basis`: substitutes x = sum_j t_j b_j,
    /// returning a polynomial in d = basis.len() variables. An empty basis
    /// evaluates at the origin (a polynomial in zero variables).
    pub fn restrict_to_span(&self, basis: &[Vec<C>]) -> Self {
        let d = basis.len();
        for b in basis {
            assert_eq!(b.len(), self.nvars, "basis vector arity mismatch");
        }
        let exprs: Vec<Self> = (0..self.nvars)
            .map(|i| {
                let mut e = Self::zero(d);
                for (j, b) in basis.iter().enumerate() {
                    if !b[i].is_zero() {
                        e.add_term(Monomial::var(d, j), b[i].clone());
                    }
                }
                e
            })
            .collect();
        self.substitute(&exprs)
    }

    /// Affine variant: x = point + sum_j t_j b_j.
    pub fn restrict_to_affine(&self, point: &[C], basis: &[Vec<C>]) -> Self {
        assert_eq!(point.len(), self.nvars);
        let d = basis.len();
        let exprs: Vec<Self> = (0..self.nvars)
            .map(|i| {
                let mut e = Self::constant(d, point[i].clone());
                for (j, b) in basis.iter().enumerate() {
                    if !b[i].is_zero() {
                        e.add_term(Monomial::var(d, j), b[i].clone());
                    }
                }
                e
            })
            .collect();
        self.substitute(&exprs)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> SparsePoly<D> {
        let mut out = SparsePoly::zero(self.nvars);
        for (m, c) in self.terms.iter() {
            out.add_term(m.clone(), f(c));
        }
        out
    }
}

impl QPoly {
    pub fn to_float(&self) -> FPoly {
        self.map_coeffs(|c| Coeff::to_f64(c))
    }
}

impl FPoly {
    /// Exact lift: every f64 coefficient is a dyadic rational.
    pub fn to_rational(&self) -> QPoly {
        self.map_coeffs(|c| qlin::qfrom_f64(*c))
    }

    /// Drop terms with |coeff| <= tol.
    pub fn trim(&self, tol: f64) -> FPoly {
        let mut out = FPoly::zero(self.nvars());
        for (m, c) in self.terms() {
            if c.abs() > tol {
                out.add_term(m.clone(), *c);
            }
        }
        out
    }
}

/// Coefficient-wise comparison: max |a_m - b_m| <= tol over the union of
/// supports. Exact backends compare exactly when tol is zero.
pub fn poly_equal<C: Coeff>(a: &SparsePoly<C>, b: &SparsePoly<C>, tol: f64) -> bool {
    assert_eq!(a.nvars(), b.nvars());
    let mut keys: std::collections::BTreeSet<&Monomial> = a.terms.keys().collect();
    keys.extend(b.terms.keys());
    keys.into_iter().all(|m| {
        let d = a.coeff(m).sub(&b.coeff(m));
        if tol == 0.0 {
            d.is_zero()
        } else {
            d.to_f64().abs() <= tol
        }
    })
}

impl<C: Coeff> fmt::Display for SparsePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c.fmt_coeff())?;
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i)?,
                    _ => write!(f, "*x{}^{}", i, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Convenience constructor used across tests and examples:
/// terms as (coefficient, exponents).
pub fn qpoly(nvars: usize, terms: &[(i64, &[u32])]) -> QPoly {
    QPoly::from_terms(
        nvars,
        terms
            .iter()
            .map(|(c, e)| (Monomial(e.to_vec()), BigRational::from_integer((*c).into()))),
    )
}

/// Float-coefficient companion of [`qpoly`].
pub fn fpoly(nvars: usize, terms: &[(f64, &[u32])]) -> FPoly {
    FPoly::from_terms(nvars, terms.iter().map(|(c, e)| (Monomial(e.to_vec()), *c)))
}

/// U(x, y) = 3 - x^2 - y^2 + 2y + x: the running two-axis demonstration
/// utility. Strictly concave with unconstrained maximum at (1/2, 1).
pub fn demo_utility() -> QPoly {
    qpoly(
        2,
        &[
            (3, &[0, 0]),
            (-1, &[2, 0]),
            (-1, &[0, 2]),
            (2, &[0, 1]),
            (1, &[1, 0]),
        ],
    )
}
