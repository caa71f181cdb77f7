//! Piecewise-polynomial surrogate families over a subspace arrangement.
//!
//! A family member assigns one ambient polynomial piece to every partition
//! class, subject to exact continuity across incident classes: for every
//! incidence row, the restriction of `p_hi - p_lo` to the lower carrier
//! vanishes identically. This module builds the continuity constraint
//! system and its kernel at a fixed degree, constructs the value-matched
//! canonical member peaked at the local maxima, assembles and maximizes
//! reconstructions, and refines the whole state as new local problems
//! arrive, with a convergence harness on top.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::arrangement::{
    build_incidence, build_partition, ArrangementError, IncidenceMatrix, Partition,
};
use crate::poly::{monomials_up_to, Monomial, QPoly};
use crate::problems::{self, rationalize_vector, LocalProblem, MeetResult, ProblemError};
use crate::qlin::{self, qfrom_i64, qfrom_f64, qone, qto_f64, qzero, QMat, QScalar, QVec};
use crate::solver::{self, SolveError};
use crate::space::{FeasibleSet, Shape, SpaceError, Subspace, Vector};

/// Hard cap on the family degree; guards the combinatorial size of the
/// coefficient space.
pub const MAX_DEGREE: usize = 8;
/// Most maxima one class may prescribe for the interpolating piece.
const MAX_PRESCRIBED: usize = 6;
const TOL: f64 = 1e-9;
/// Maximizers within this of the best class winner count as maximal.
const WINNER_TOL: f64 = 1e-6;
/// Cap on grid/sample set sizes used by fits and checks.
const SAMPLE_CAP: usize = 4096;

pub type Result<T> = std::result::Result<T, SurrogateError>;

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("degree {given} cannot express the prescribed pieces; try degree {required}")]
    DegreeTooLow { given: usize, required: usize },
    #[error("degree {0} exceeds the cap of {MAX_DEGREE}")]
    DegreeCap(usize),
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error("conflicting prescribed boundary values at class {class}: {detail}")]
    ConflictingBoundary { class: usize, detail: String },
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("maximization region is unbounded")]
    UnboundedRegion,
    #[error("incompatible with problem {with}: {reason}")]
    Incompatible { with: String, reason: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

// ---------------------------------------------------------------------------
// Piecewise functions

/// One polynomial piece per partition class, all in ambient variables.
/// `degree` bounds every piece.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn {
    /// Indexed like `Partition::classes`.
    pub pieces: Vec<QPoly>,
    pub degree: usize,
}

impl PiecewiseFn {
    pub fn zero(lambda: usize, nvars: usize, degree: usize) -> Self {
        PiecewiseFn {
            pieces: vec![QPoly::zero(nvars); lambda],
            degree,
        }
    }

    pub fn lambda(&self) -> usize {
        self.pieces.len()
    }

    pub fn nvars(&self) -> usize {
        self.pieces.first().map_or(0, |p| p.nvars())
    }

    pub fn max_piece_degree(&self) -> usize {
        self.pieces
            .iter()
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    /// Evaluate through the partition: the piece of the smallest class
    /// containing `x` decides the value.
    pub fn eval(&self, partition: &Partition, x: &Vector) -> f64 {
        let k = partition.class_of(x, TOL);
        self.pieces[k].eval_f64(&x.0)
    }

    /// `Some(c)` when every piece is the same constant `c` (exactly).
    pub fn constant_value(&self) -> Option<f64> {
        let c0 = self.pieces.first()?.coeff(&Monomial::unit(self.nvars()));
        for p in &self.pieces {
            if p.degree().unwrap_or(0) > 0 {
                return None;
            }
            if p.coeff(&Monomial::unit(p.nvars())) != c0 {
                return None;
            }
        }
        Some(qto_f64(&c0))
    }

    /// Exact continuity: every incidence row's piece difference restricts
    /// to the zero polynomial on the lower carrier.
    pub fn continuity_exact(&self, partition: &Partition, incidence: &IncidenceMatrix) -> bool {
        incidence.rows.iter().all(|row| {
            let diff = self.pieces[row.hi].sub(&self.pieces[row.lo]);
            restrict_exact(&diff, partition.classes[row.lo].exact_basis()).is_zero()
        })
    }

    /// Float lane: max |p_hi - p_lo| over `samples` points of each boundary
    /// carrier (coordinates drawn from [-2, 2]^d, seeded).
    pub fn continuity_residual(
        &self,
        partition: &Partition,
        incidence: &IncidenceMatrix,
        samples: usize,
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for row in &incidence.rows {
            let carrier = &partition.classes[row.lo].carrier;
            let diff = self.pieces[row.hi].sub(&self.pieces[row.lo]).to_float();
            for _ in 0..samples.max(1) {
                let coords: Vec<f64> =
                    (0..carrier.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let x = carrier.embed(&coords);
                worst = worst.max(diff.eval_f64(&x.0).abs());
            }
        }
        worst
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "degree": self.degree,
            "pieces": self.pieces.iter().map(qpoly_to_json).collect::<Vec<_>>(),
        })
    }
}

fn qscalar_string(c: &QScalar) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

/// Terms as `[[exponents, "num/den"], ...]` in the map's deterministic order.
pub fn qpoly_to_json(p: &QPoly) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = p
        .terms()
        .map(|(m, c)| serde_json::json!([m.0.clone(), qscalar_string(c)]))
        .collect();
    serde_json::json!({ "nvars": p.nvars(), "terms": terms })
}

fn mono_poly(nvars: usize, m: &Monomial) -> QPoly {
    QPoly::from_terms(nvars, [(m.clone(), qone())])
}

/// Two restrictions agree when their difference is exactly zero or has
/// coefficients below the float-lane tolerance — prescribed data computed
/// through float solves carries ~1e-16 dirt that must not read as a
/// mathematical conflict.
fn restrictions_agree(a: &QPoly, b: &QPoly) -> bool {
    near_zero(&a.sub(b))
}

fn near_zero(p: &QPoly) -> bool {
    p.is_zero() || p.max_abs_coeff() <= TOL
}

/// Exact restriction of an ambient polynomial to the span of a rational
/// orthogonal basis (pullback coordinates). An empty basis restricts to the
/// value at the origin, kept as a 0-variable polynomial.
fn restrict_exact(p: &QPoly, basis: &[QVec]) -> QPoly {
    if basis.is_empty() {
        let c = p.coeff(&Monomial::unit(p.nvars()));
        return QPoly::from_terms(0, [(Monomial::unit(0), c)]);
    }
    p.restrict_to_span(basis)
}

// ---------------------------------------------------------------------------
// Continuity constraint system and its kernel

/// The boundary-continuity equations at a fixed degree, as one exact linear
/// system over all piece coefficients (class-major, monomials in the fixed
/// (degree, lex) enumeration).
#[derive(Debug, Clone)]
pub struct ContinuitySystem {
    pub matrix: QMat,
    pub lambda: usize,
    pub nvars: usize,
    pub degree: usize,
    pub monomials: Vec<Monomial>,
    pub rows: usize,
}

impl ContinuitySystem {
    pub fn unknowns(&self) -> usize {
        self.lambda * self.monomials.len()
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
}

/// Core constructor: one block of equations per boundary `(hi, lo, basis)`,
/// stating that the restrictions of the `hi` and `lo` pieces to the span of
/// `basis` agree coefficient-by-coefficient.
pub fn continuity_rows(
    lambda: usize,
    nvars: usize,
    degree: usize,
    boundaries: &[(usize, usize, Vec<QVec>)],
) -> ContinuitySystem {
    let monos = monomials_up_to(nvars, degree);
    let width = lambda * monos.len();
    let mut rows: Vec<QVec> = Vec::new();
    for (hi, lo, basis) in boundaries {
        if basis.is_empty() {
            // Restriction to the origin: constant terms agree.
            let mut row = vec![qzero(); width];
            row[hi * monos.len()] = qone();
            row[lo * monos.len()] -= qone();
            rows.push(row);
            continue;
        }
        let d = basis.len();
        let restricted: Vec<QPoly> = monos
            .iter()
            .map(|m| mono_poly(nvars, m).restrict_to_span(basis))
            .collect();
        for mu in monomials_up_to(d, degree) {
            let mut row = vec![qzero(); width];
            let mut nonzero = false;
            for (j, r) in restricted.iter().enumerate() {
                let c = r.coeff(&mu);
                if c != qzero() {
                    row[hi * monos.len() + j] = c.clone();
                    row[lo * monos.len() + j] -= c;
                    nonzero = true;
                }
            }
            if nonzero {
                rows.push(row);
            }
        }
    }
    let nrows = rows.len();
    let matrix = if rows.is_empty() {
        QMat::zeros(0, width)
    } else {
        QMat::from_rows(rows)
    };
    ContinuitySystem {
        matrix,
        lambda,
        nvars,
        degree,
        monomials: monos,
        rows: nrows,
    }
}

/// The constraint system of a partition's incidence relation.
pub fn continuity_system(
    partition: &Partition,
    incidence: &IncidenceMatrix,
    degree: usize,
) -> ContinuitySystem {
    let boundaries: Vec<(usize, usize, Vec<QVec>)> = incidence
        .rows
        .iter()
        .map(|row| {
            (
                row.hi,
                row.lo,
                partition.classes[row.lo].exact_basis().to_vec(),
            )
        })
        .collect();
    continuity_rows(partition.lambda(), partition.ambient, degree, &boundaries)
}

/// Basis of the kernel of the continuity system, in the reduced echelon
/// normal form of the nullspace — a deterministic, basis-independent choice.
pub fn kernel_basis(system: &ContinuitySystem) -> Result<Vec<PiecewiseFn>> {
    if system.degree > MAX_DEGREE {
        return Err(SurrogateError::DegreeCap(system.degree));
    }
    if system.unknowns() > 20_000 {
        return Err(SurrogateError::Cap(format!(
            "{} coefficient unknowns",
            system.unknowns()
        )));
    }
    let null = system.matrix.nullspace();
    Ok(null
        .iter()
        .map(|v| vector_to_piecewise(v, system.lambda, system.nvars, &system.monomials, system.degree))
        .collect())
}

fn vector_to_piecewise(
    v: &QVec,
    lambda: usize,
    nvars: usize,
    monos: &[Monomial],
    degree: usize,
) -> PiecewiseFn {
    let mut pieces = Vec::with_capacity(lambda);
    for k in 0..lambda {
        let terms = monos
            .iter()
            .enumerate()
            .filter(|(j, _)| v[k * monos.len() + j] != qzero())
            .map(|(j, m)| (m.clone(), v[k * monos.len() + j].clone()));
        pieces.push(QPoly::from_terms(nvars, terms));
    }
    PiecewiseFn { pieces, degree }
}

/// Flatten a piecewise function into the system's coefficient coordinates
/// (class-major, monomial enumeration order).
pub fn piecewise_to_vector(f: &PiecewiseFn, monos: &[Monomial]) -> QVec {
    let mut v = vec![qzero(); f.pieces.len() * monos.len()];
    for (k, p) in f.pieces.iter().enumerate() {
        for (j, m) in monos.iter().enumerate() {
            v[k * monos.len() + j] = p.coeff(m);
        }
    }
    v
}

// ---------------------------------------------------------------------------
// Degree choice and hosted maxima

/// A local maximum together with its exact coordinates and utility value.
#[derive(Debug, Clone)]
pub struct HostedMax {
    pub point: Vector,
    pub value: f64,
    pub exact_point: QVec,
    pub exact_value: QScalar,
}

/// Distinct local maxima grouped by the smallest partition class containing
/// them. Conflicting values at a shared point are an error.
pub fn hosted_maxima(
    problems: &[LocalProblem],
    partition: &Partition,
) -> Result<Vec<Vec<HostedMax>>> {
    let mut hosted: Vec<Vec<HostedMax>> = vec![Vec::new(); partition.lambda()];
    let mut seen: Vec<(Vector, f64)> = Vec::new();
    for p in problems {
        if !p.is_solved() {
            return Err(SurrogateError::InvalidInput(format!(
                "problem {} is unsolved",
                p.id
            )));
        }
        for s in &p.solutions {
            let value = p.value.expect("solved");
            if let Some((_, v0)) = seen.iter().find(|(q, _)| q.approx_eq(s, TOL)) {
                if (v0 - value).abs() > TOL {
                    let class = partition.class_of(s, TOL);
                    return Err(SurrogateError::ConflictingBoundary {
                        class,
                        detail: format!(
                            "two problems prescribe values {v0} and {value} at the same maximum"
                        ),
                    });
                }
                continue;
            }
            seen.push((s.clone(), value));
            let exact_point = rationalize_vector(s);
            let exact_value = p.utility.eval(&exact_point);
            let class = partition.class_of(s, TOL);
            hosted[class].push(HostedMax {
                point: s.clone(),
                value,
                exact_point,
                exact_value,
            });
        }
    }
    Ok(hosted)
}

/// The family degree: the largest number of distinct local maxima hosted by
/// a single class, floored at 2 as soon as any maximum exists anywhere, and
/// 0 only for a family with no maxima at all.
pub fn choose_degree(problems: &[LocalProblem], partition: &Partition) -> Result<usize> {
    let hosted = hosted_maxima(problems, partition)?;
    let total: usize = hosted.iter().map(|h| h.len()).sum();
    if total == 0 {
        return Ok(0);
    }
    let per_class = hosted.iter().map(|h| h.len()).max().unwrap_or(0);
    Ok(per_class.max(2))
}

// ---------------------------------------------------------------------------
// Canonical pieces

/// Exact peaked quadratic `value - |x - peak|^2`.
fn peaked_quadratic(nvars: usize, peak: &QVec, value: &QScalar) -> QPoly {
    let mut p = QPoly::constant(nvars, value.clone());
    for i in 0..nvars {
        // -(x_i - a_i)^2 = -x_i^2 + 2 a_i x_i - a_i^2
        let mut sq = Monomial::unit(nvars);
        sq.0[i] = 2;
        p.add_term(sq, -qone());
        p.add_term(Monomial::var(nvars, i), qfrom_i64(2) * &peak[i]);
        p.add_term(Monomial::unit(nvars), -(&peak[i] * &peak[i]));
    }
    p
}

// Small exact univariate helpers (coefficient vectors, index = power).
fn upoly_eval(c: &[QScalar], t: &QScalar) -> QScalar {
    let mut acc = qzero();
    for k in (0..c.len()).rev() {
        acc = acc * t + &c[k];
    }
    acc
}

fn upoly_deriv(c: &[QScalar]) -> Vec<QScalar> {
    if c.len() <= 1 {
        return vec![qzero()];
    }
    (1..c.len()).map(|k| qfrom_i64(k as i64) * &c[k]).collect()
}

fn upoly_mul(a: &[QScalar], b: &[QScalar]) -> Vec<QScalar> {
    let mut out = vec![qzero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Piece with several prescribed strict local maxima. Supported when the
/// maxima are collinear: a Hermite interpolant along the line (values
/// matched, first derivatives zero) is bent down by a multiple of the
/// squared node polynomial to make every node a strict maximum, and a
/// quadratic penalty removes the degeneracy off the line. Degree `2s` for
/// `s` maxima.
fn multi_max_piece(nvars: usize, maxima: &[HostedMax]) -> Result<QPoly> {
    let s = maxima.len();
    if s > MAX_PRESCRIBED {
        return Err(SurrogateError::Cap(format!(
            "{s} prescribed maxima in one class"
        )));
    }
    let a = &maxima[0].exact_point;
    let d: QVec = maxima[1]
        .exact_point
        .iter()
        .zip(a)
        .map(|(x, y)| x - y)
        .collect();
    let dd = qlin::dot(&d, &d);
    // Collinearity: every offset must be a rational multiple of `d`.
    let mut ts: Vec<QScalar> = Vec::with_capacity(s);
    for m in maxima {
        let off: QVec = m.exact_point.iter().zip(a).map(|(x, y)| x - y).collect();
        let t = qlin::dot(&off, &d) / &dd;
        for (o, di) in off.iter().zip(&d) {
            if o != &(&t * di) {
                return Err(SurrogateError::UnsupportedGeometry(
                    "prescribed maxima in one class are not collinear".into(),
                ));
            }
        }
        ts.push(t);
    }

    // Hermite interpolation: H(t_i) = v_i, H'(t_i) = 0, degree 2s-1.
    let cols = 2 * s;
    let mut rows: Vec<QVec> = Vec::new();
    let mut rhs: QVec = Vec::new();
    for (i, m) in maxima.iter().enumerate() {
        let mut val_row = vec![qzero(); cols];
        let mut der_row = vec![qzero(); cols];
        let mut power = qone();
        for j in 0..cols {
            val_row[j] = power.clone();
            if j + 1 < cols {
                der_row[j + 1] = qfrom_i64((j + 1) as i64) * &power;
            }
            power *= &ts[i];
        }
        rows.push(val_row);
        rhs.push(m.exact_value.clone());
        rows.push(der_row);
        rhs.push(qzero());
    }
    let hermite = QMat::from_rows(rows)
        .solve(&rhs)
        .expect("Hermite system is nonsingular for distinct nodes");

    // Node polynomial Q = prod (t - t_i) and the bend factor.
    let mut q = vec![qone()];
    for t in &ts {
        q = upoly_mul(&q, &[-t.clone(), qone()]);
    }
    let qp = upoly_deriv(&q);
    let h2 = upoly_deriv(&upoly_deriv(&hermite));
    let mut c = qzero();
    for t in &ts {
        let qp_t = upoly_eval(&qp, t);
        let h2_t = upoly_eval(&h2, t);
        let cand = h2_t / (qfrom_i64(2) * &qp_t * &qp_t);
        if cand > c {
            c = cand;
        }
    }
    c += qone();
    // g = H - c Q^2: strict local maxima at every node.
    let q2 = upoly_mul(&q, &q);
    let mut g = vec![qzero(); q2.len()];
    for (k, coeff) in hermite.iter().enumerate() {
        g[k] = coeff.clone();
    }
    for (k, coeff) in q2.iter().enumerate() {
        g[k] -= &c * coeff;
    }

    // Ambient assembly: line coordinate ell(x) = (x - a)·d / (d·d),
    // then g(ell(x)) minus the squared distance to the line.
    let mut ell = QPoly::zero(nvars);
    let mut a_dot_d = qzero();
    for i in 0..nvars {
        ell.add_term(Monomial::var(nvars, i), &d[i] / &dd);
        a_dot_d += &a[i] * &d[i];
    }
    ell.add_term(Monomial::unit(nvars), -(a_dot_d / &dd));
    let mut piece = QPoly::zero(nvars);
    let mut ell_pow = QPoly::constant(nvars, qone());
    for coeff in &g {
        piece = piece.add(&ell_pow.scale(coeff));
        ell_pow = ell_pow.mul(&ell);
    }
    // rho = |x - a|^2 - (d·d) ell^2 >= 0, zero exactly on the line.
    let mut rho = QPoly::zero(nvars);
    for i in 0..nvars {
        let mut sq = Monomial::unit(nvars);
        sq.0[i] = 2;
        rho.add_term(sq, qone());
        rho.add_term(Monomial::var(nvars, i), qfrom_i64(-2) * &a[i]);
        rho.add_term(Monomial::unit(nvars), &a[i] * &a[i]);
    }
    rho = rho.sub(&ell.mul(&ell).scale(&dd));
    Ok(piece.sub(&rho))
}

/// The value-matched canonical family member. Classes whose carrier is a
/// problem's own carrier take pieces peaked at that problem's maxima;
/// classes hosting maxima of other problems take pieces peaked there;
/// maxima-free classes take the piece forced by continuity with the
/// already-fixed classes above them; the complement takes a constrained
/// least-squares fit. `degree_cap` rejects prescribed pieces above the cap,
/// used when the caller fixed the degree explicitly.
pub fn canonical_pieces(
    problems: &[LocalProblem],
    partition: &Partition,
    incidence: &IncidenceMatrix,
    degree: usize,
    degree_cap: Option<usize>,
    samples: usize,
) -> Result<PiecewiseFn> {
    let n = partition.ambient;
    let lambda = partition.lambda();
    let hosted = hosted_maxima(problems, partition)?;
    let complement = partition.complement_index();

    // Prescribed point sets: a class that *is* some problem's carrier takes
    // all of that problem's maxima; any other class takes the maxima it
    // hosts minimally.
    let mut prescribed: Vec<Vec<HostedMax>> = vec![Vec::new(); lambda];
    for (c, class) in partition.classes.iter().enumerate() {
        if Some(c) == complement {
            continue;
        }
        let mut pts: Vec<HostedMax> = Vec::new();
        for p in problems {
            if qlin::same_span(p.exact_basis(), class.exact_basis(), n) {
                for list in &hosted {
                    for h in list {
                        if p.solutions.iter().any(|s| s.approx_eq(&h.point, TOL))
                            && !pts.iter().any(|q| q.point.approx_eq(&h.point, TOL))
                        {
                            pts.push(h.clone());
                        }
                    }
                }
            }
        }
        if pts.is_empty() {
            pts = hosted[c].clone();
        }
        prescribed[c] = pts;
    }

    let mut pieces: Vec<Option<QPoly>> = vec![None; lambda];
    for c in 0..lambda {
        if Some(c) == complement || prescribed[c].is_empty() {
            continue;
        }
        let piece = match prescribed[c].len() {
            1 => peaked_quadratic(
                n,
                &prescribed[c][0].exact_point,
                &prescribed[c][0].exact_value,
            ),
            _ => multi_max_piece(n, &prescribed[c])?,
        };
        pieces[c] = Some(piece);
    }

    // Maxima-free classes, forced top-down by continuity with fixed pieces.
    let mut order: Vec<usize> = (0..lambda)
        .filter(|&c| Some(c) != complement && pieces[c].is_none())
        .collect();
    order.sort_by_key(|&c| std::cmp::Reverse(partition.classes[c].dim()));
    for c in order {
        let basis = partition.classes[c].exact_basis();
        let mut forced: Option<QPoly> = None;
        for row in &incidence.rows {
            if row.lo != c {
                continue;
            }
            let Some(upper) = pieces[row.hi].as_ref() else {
                continue;
            };
            let restricted = restrict_exact(upper, basis);
            match &forced {
                None => forced = Some(restricted),
                Some(f) if restrictions_agree(f, &restricted) => {}
                Some(_) => {
                    return Err(SurrogateError::ConflictingBoundary {
                        class: c,
                        detail: "higher classes force different restrictions".into(),
                    })
                }
            }
        }
        let Some(q) = forced else {
            return Err(SurrogateError::InvalidInput(format!(
                "class {c} has no fixed class above it"
            )));
        };
        // Ridge extension back to ambient coordinates: substitute the exact
        // coordinate functionals c_i(x) = (b_i . x) / (b_i . b_i); by
        // orthogonality of the basis this restricts back to `q`.
        let piece = if basis.is_empty() {
            QPoly::constant(n, q.coeff(&Monomial::unit(0)))
        } else {
            let exprs: Vec<QPoly> = basis
                .iter()
                .map(|b| {
                    let bb = qlin::dot(b, b);
                    let mut lf = QPoly::zero(n);
                    for (i, bi) in b.iter().enumerate() {
                        lf.add_term(Monomial::var(n, i), bi / &bb);
                    }
                    lf
                })
                .collect();
            q.substitute(&exprs)
        };
        debug_assert!(restrict_exact(&piece, basis) == q);
        pieces[c] = Some(piece);
    }

    // All mutual boundaries among the fixed pieces must agree exactly; this
    // is where incompatible prescribed data (peaks whose quadratics disagree
    // on a shared carrier) surfaces.
    for row in &incidence.rows {
        let (Some(hi), Some(lo)) = (pieces[row.hi].as_ref(), pieces[row.lo].as_ref()) else {
            continue;
        };
        let diff = hi.sub(lo);
        if !near_zero(&restrict_exact(&diff, partition.classes[row.lo].exact_basis())) {
            return Err(SurrogateError::ConflictingBoundary {
                class: row.lo,
                detail: format!(
                    "pieces of classes {} and {} disagree on their shared carrier",
                    row.hi, row.lo
                ),
            });
        }
    }

    let prescribed_degree = pieces
        .iter()
        .flatten()
        .filter_map(|p| p.degree())
        .max()
        .unwrap_or(0);
    if let Some(cap) = degree_cap {
        if prescribed_degree > cap {
            return Err(SurrogateError::DegreeTooLow {
                given: cap,
                required: cap + 1,
            });
        }
    }
    let effective = degree.max(prescribed_degree);
    if effective > MAX_DEGREE {
        return Err(SurrogateError::DegreeCap(effective));
    }

    if let Some(ci) = complement {
        let constraints: Vec<(QPoly, Vec<QVec>)> = incidence
            .rows
            .iter()
            .filter(|row| row.hi == ci)
            .map(|row| {
                (
                    pieces[row.lo].clone().expect("lower pieces are fixed"),
                    partition.classes[row.lo].exact_basis().to_vec(),
                )
            })
            .collect();
        let (lo, hi) = inflated_bbox(problems, 0.5)?;
        let grid = grid_samples(&lo, &hi, samples);
        let targets: Vec<(Vec<f64>, f64)> = grid
            .into_iter()
            .map(|x| {
                let xv = Vector(x.clone());
                let mut best = (f64::INFINITY, 0usize);
                for (c, class) in partition.classes.iter().enumerate() {
                    if Some(c) == ci.into() || pieces[c].is_none() {
                        continue;
                    }
                    let proj = class.carrier.project(&xv);
                    let dist = proj.dist(&xv);
                    if dist < best.0 {
                        best = (dist, c);
                    }
                }
                let proj = partition.classes[best.1].carrier.project(&xv);
                let t = pieces[best.1].as_ref().unwrap().eval_f64(&proj.0);
                (x, t)
            })
            .collect();
        let (alpha, _residual) = fit_alpha(n, effective, &constraints, &targets)?;
        pieces[ci] = Some(alpha);
    }

    Ok(PiecewiseFn {
        pieces: pieces.into_iter().map(|p| p.expect("all fixed")).collect(),
        degree: effective,
    })
}

/// Equality-constrained least squares for the complement piece: exact
/// continuity with every adjacent lower piece, free directions fitted to
/// the sampled targets. Returns the piece and the RMS fit residual.
pub fn fit_alpha(
    nvars: usize,
    degree: usize,
    constraints: &[(QPoly, Vec<QVec>)],
    targets: &[(Vec<f64>, f64)],
) -> Result<(QPoly, f64)> {
    let monos = monomials_up_to(nvars, degree);
    let width = monos.len();
    let mut rows: Vec<QVec> = Vec::new();
    let mut rhs: QVec = Vec::new();
    for (lower, basis) in constraints {
        if basis.is_empty() {
            let mut row = vec![qzero(); width];
            row[0] = qone();
            rows.push(row);
            rhs.push(lower.eval(&vec![qzero(); nvars]));
            continue;
        }
        let d = basis.len();
        let restricted: Vec<QPoly> = monos
            .iter()
            .map(|m| mono_poly(nvars, m).restrict_to_span(basis))
            .collect();
        let target_q = lower.restrict_to_span(basis);
        for mu in monomials_up_to(d, degree) {
            let mut row = vec![qzero(); width];
            let mut any = false;
            for (j, r) in restricted.iter().enumerate() {
                let c = r.coeff(&mu);
                if c != qzero() {
                    row[j] = c;
                    any = true;
                }
            }
            let t = target_q.coeff(&mu);
            if any || t != qzero() {
                rows.push(row);
                rhs.push(t);
            }
        }
    }
    let a = if rows.is_empty() {
        QMat::zeros(0, width)
    } else {
        QMat::from_rows(rows)
    };
    let particular = match a.solve(&rhs) {
        Some(p) => p,
        // Exact inconsistency has two causes: genuine infeasibility at this
        // degree, or ~1e-16 dirt in prescribed data that came through float
        // solves. A min-norm float solve separates them — a tiny residual
        // means the system is consistent up to the float lane.
        None => {
            let af = DMatrix::from_fn(a.rows, a.cols, |i, j| qto_f64(&a.data[i][j]));
            let bf = nalgebra::DVector::from_fn(a.rows, |i, _| qto_f64(&rhs[i]));
            let sol = af
                .clone()
                .svd(true, true)
                .solve(&bf, 1e-12)
                .map_err(|e| SurrogateError::InvalidInput(e.to_string()))?;
            let residual = (&af * &sol - &bf).amax();
            if residual > 1e-7 {
                return Err(SurrogateError::DegreeTooLow {
                    given: degree,
                    required: degree + 1,
                });
            }
            sol.iter().map(|x| qfrom_f64(*x)).collect()
        }
    };
    let null = a.nullspace();

    // Least squares on the free directions, in floats; the fitted weights
    // are folded back exactly, so the constraints stay exact.
    let base = QPoly::from_terms(
        nvars,
        monos
            .iter()
            .zip(&particular)
            .filter(|(_, c)| **c != qzero())
            .map(|(m, c)| (m.clone(), c.clone())),
    );
    let free: Vec<QPoly> = null
        .iter()
        .map(|v| {
            QPoly::from_terms(
                nvars,
                monos
                    .iter()
                    .zip(v)
                    .filter(|(_, c)| **c != qzero())
                    .map(|(m, c)| (m.clone(), c.clone())),
            )
        })
        .collect();
    let mut piece = base.clone();
    if !free.is_empty() && !targets.is_empty() {
        let base_f = base.to_float();
        let frees_f: Vec<_> = free.iter().map(|p| p.to_float()).collect();
        let g = DMatrix::from_fn(targets.len(), free.len(), |s, i| {
            frees_f[i].eval_f64(&targets[s].0)
        });
        let b = nalgebra::DVector::from_fn(targets.len(), |s, _| {
            targets[s].1 - base_f.eval_f64(&targets[s].0)
        });
        let svd = g.svd(true, true);
        if let Ok(w) = svd.solve(&b, 1e-12) {
            for (i, q) in free.iter().enumerate() {
                piece = piece.add(&q.scale(&qfrom_f64(w[i])));
            }
        }
    }
    let pf = piece.to_float();
    let residual = if targets.is_empty() {
        0.0
    } else {
        (targets
            .iter()
            .map(|(x, t)| (pf.eval_f64(x) - t).powi(2))
            .sum::<f64>()
            / targets.len() as f64)
            .sqrt()
    };
    Ok((piece, residual))
}

// ---------------------------------------------------------------------------
// Sampling boxes

fn union_ambient_bbox(problems: &[LocalProblem]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = problems
        .first()
        .ok_or_else(|| SurrogateError::InvalidInput("empty problem family".into()))?
        .ambient_dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in problems {
        let (slo, shi) = p.feasible.bounding_box()?;
        let mut alo = vec![0.0; n];
        let mut ahi = vec![0.0; n];
        for (j, b) in p.carrier().basis().iter().enumerate() {
            for i in 0..n {
                let (x, y) = (b.0[i] * slo[j], b.0[i] * shi[j]);
                alo[i] += x.min(y);
                ahi[i] += x.max(y);
            }
        }
        for i in 0..n {
            lo[i] = lo[i].min(alo[i]);
            hi[i] = hi[i].max(ahi[i]);
        }
    }
    Ok((lo, hi))
}

/// Bounding box of the union of feasible sets, inflated by `factor` of each
/// side length; dimensions the data does not extend along get a unit of
/// padding so fits and maximizations see a full-dimensional box.
fn inflated_bbox(problems: &[LocalProblem], factor: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut lo, mut hi) = union_ambient_bbox(problems)?;
    for i in 0..lo.len() {
        let pad = (hi[i] - lo[i]) * factor;
        lo[i] -= pad;
        hi[i] += pad;
        if hi[i] - lo[i] < TOL {
            lo[i] -= 0.5;
            hi[i] += 0.5;
        }
    }
    Ok((lo, hi))
}

/// Default maximization region: the exact bounding box of the union of the
/// feasible sets (thin dimensions padded by 1/2 on each side).
pub fn default_region(problems: &[LocalProblem]) -> Result<FeasibleSet> {
    let (lo, hi) = inflated_bbox(problems, 0.0)?;
    let n = lo.len();
    Ok(FeasibleSet::new(
        Subspace::full(n),
        Shape::Box {
            lower: lo,
            upper: hi,
        },
    )?)
}

/// Deterministic cell-center grid with roughly `samples` points.
fn grid_samples(lo: &[f64], hi: &[f64], samples: usize) -> Vec<Vec<f64>> {
    let n = lo.len();
    if n == 0 {
        return vec![vec![]];
    }
    let mut g = (samples.max(1) as f64).powf(1.0 / n as f64).ceil() as usize;
    g = g.max(2);
    while g.pow(n as u32) > SAMPLE_CAP && g > 2 {
        g -= 1;
    }
    let mut out = Vec::with_capacity(g.pow(n as u32));
    let mut idx = vec![0usize; n];
    loop {
        out.push(
            (0..n)
                .map(|i| lo[i] + (hi[i] - lo[i]) * (idx[i] as f64 + 0.5) / g as f64)
                .collect(),
        );
        let mut i = 0;
        loop {
            idx[i] += 1;
            if idx[i] < g {
                break;
            }
            idx[i] = 0;
            i += 1;
            if i == n {
                return out;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Assembly and maximization

/// Sum of the basis elements, each normalized to unit leading coefficient
/// (first nonzero coordinate in the canonical coefficient order). The
/// second component flags an empty basis, whose assembly is the zero
/// function.
pub fn assemble_v(
    basis: &[PiecewiseFn],
    lambda: usize,
    nvars: usize,
    degree: usize,
) -> (PiecewiseFn, bool) {
    if basis.is_empty() {
        return (PiecewiseFn::zero(lambda, nvars, degree), true);
    }
    let monos = monomials_up_to(nvars, degree);
    let mut pieces = vec![QPoly::zero(nvars); lambda];
    for f in basis {
        let v = piecewise_to_vector(f, &monos);
        let lead = v.iter().find(|c| **c != qzero()).cloned().unwrap_or(qone());
        for (k, piece) in pieces.iter_mut().enumerate() {
            let scaled = f.pieces[k].scale(&(qone() / &lead));
            *piece = piece.add(&scaled);
        }
    }
    (PiecewiseFn { pieces, degree }, false)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassWinner {
    pub class: usize,
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximizeReport {
    /// Winners within `1e-6` of the best class winner, deduplicated.
    pub maximal_elements: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub best: f64,
    /// Per-class winners over class ∩ region (complement class excluded).
    pub per_class: Vec<Option<ClassWinner>>,
    pub degenerate_constant: bool,
    /// Set when the complement piece exceeds the best carrier value: its
    /// maxima lie outside the union of carriers, where the reconstruction
    /// goal does not constrain the family.
    pub complement_excess: Option<f64>,
}

/// Per-class maximization of a piecewise function over `region`, reported
/// over the union of carriers. The complement class's piece is a continuity
/// device: its winner is reported separately and never enters the maximal
/// element set.
pub fn maximize_v(
    f: &PiecewiseFn,
    partition: &Partition,
    region: &FeasibleSet,
) -> Result<MaximizeReport> {
    let n = partition.ambient;
    if region.carrier.dim() != n {
        return Err(SurrogateError::InvalidInput(
            "maximization region must live in the full ambient space".into(),
        ));
    }
    if let Shape::Polytope { a, .. } = &region.shape {
        if !crate::space::polytope_bounded(a, n)? {
            return Err(SurrogateError::UnboundedRegion);
        }
    }
    if let Some(c) = f.constant_value() {
        let rep = region.representative()?;
        return Ok(MaximizeReport {
            maximal_elements: vec![rep.0.clone()],
            values: vec![c],
            best: c,
            per_class: vec![None; partition.lambda()],
            degenerate_constant: true,
            complement_excess: None,
        });
    }
    let complement = partition.complement_index();
    let mut per_class: Vec<Option<ClassWinner>> = vec![None; partition.lambda()];
    let mut winners: Vec<(Vector, f64)> = Vec::new();
    let mut complement_value: Option<f64> = None;
    for (c, class) in partition.classes.iter().enumerate() {
        if class.carrier.dim() == 0 {
            let origin = Vector::zeros(n);
            if region.contains_ambient(&origin, TOL) {
                let value = f.pieces[c].eval_f64(&origin.0);
                per_class[c] = Some(ClassWinner {
                    class: c,
                    point: origin.0.clone(),
                    value,
                });
                winners.push((origin, value));
            }
            continue;
        }
        let shape = match problems::restrict_shape_to(region, &class.carrier) {
            Ok(s) => s,
            Err(ProblemError::EmptyIntersection) => continue,
            Err(e) => return Err(e.into()),
        };
        let feasible = match FeasibleSet::new(class.carrier.clone(), shape) {
            Ok(f) => f,
            Err(SpaceError::EmptyFeasible) => continue,
            Err(e) => return Err(e.into()),
        };
        let sol = match solver::solve_local(&f.pieces[c].to_float(), &feasible) {
            Ok(s) => s,
            Err(SolveError::CapExceeded(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let Some(point) = sol.points.first() else {
            continue;
        };
        if Some(c) == complement {
            complement_value = Some(sol.value);
            continue;
        }
        per_class[c] = Some(ClassWinner {
            class: c,
            point: point.0.clone(),
            value: sol.value,
        });
        winners.push((point.clone(), sol.value));
    }
    if winners.is_empty() {
        return Err(SurrogateError::InvalidInput(
            "no class intersects the maximization region".into(),
        ));
    }
    let best = winners.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    winners.retain(|(_, v)| *v >= best - WINNER_TOL);
    winners.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.lex_cmp(&b.0)));
    let mut maximal: Vec<(Vector, f64)> = Vec::new();
    for (p, v) in winners {
        if !maximal.iter().any(|(q, _)| q.approx_eq(&p, TOL)) {
            maximal.push((p, v));
        }
    }
    let complement_excess = complement_value.and_then(|v| {
        if v > best + WINNER_TOL {
            Some(v - best)
        } else {
            None
        }
    });
    Ok(MaximizeReport {
        maximal_elements: maximal.iter().map(|(p, _)| p.0.clone()).collect(),
        values: maximal.iter().map(|(_, v)| *v).collect(),
        best,
        per_class,
        degenerate_constant: false,
        complement_excess,
    })
}

// ---------------------------------------------------------------------------
// Surrogate state and evolution

#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Family degree override; when absent the degree law decides.
    pub degree: Option<usize>,
    /// Sample budget for fits and sampled checks.
    pub samples: usize,
    pub seed: u64,
    /// Maximization region; defaults to the union bounding box.
    pub region: Option<FeasibleSet>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            degree: None,
            samples: 200,
            seed: 7,
            region: None,
        }
    }
}

/// Everything the pipeline knows after seeing `m+1` problems.
#[derive(Debug, Clone)]
pub struct SurrogateState {
    pub problems: Vec<LocalProblem>,
    pub partition: Partition,
    pub incidence: IncidenceMatrix,
    /// Family degree from the degree law (or the caller's override).
    pub r: usize,
    pub kernel_basis: Vec<PiecewiseFn>,
    /// Sum of the kernel basis elements: the basis-determined assembly.
    pub v: PiecewiseFn,
    /// Value-matched canonical member, when the local data admits one.
    pub interpolant: Option<PiecewiseFn>,
    pub maximal_elements: Vec<Vector>,
    pub maximal_values: Vec<f64>,
    pub region: FeasibleSet,
    pub flags: Vec<String>,
}

impl SurrogateState {
    /// The member whose maxima the pipeline reports: the canonical
    /// interpolant when it exists, else the basis assembly.
    pub fn reconstruction(&self) -> &PiecewiseFn {
        self.interpolant.as_ref().unwrap_or(&self.v)
    }

    pub fn mu(&self) -> usize {
        self.maximal_elements.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ambient_dim": self.partition.ambient,
            "problems": self.problems.iter().map(|p| p.id.clone()).collect::<Vec<_>>(),
            "r": self.r,
            "lambda": self.partition.lambda(),
            "tau": self.incidence.tau(),
            "mu": self.mu(),
            "partition": self.partition.to_json(),
            "incidence": self.incidence.to_json(&self.partition),
            "kernel_dimension": self.kernel_basis.len(),
            "kernel_basis": self.kernel_basis.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
            "v": self.v.to_json(),
            "interpolant": self.interpolant.as_ref().map(|f| f.to_json()),
            "maximal_elements": self.maximal_elements.iter().map(|p| p.0.clone()).collect::<Vec<_>>(),
            "maximal_values": self.maximal_values.clone(),
            "flags": self.flags.clone(),
        })
    }
}

/// Run the full pipeline: solve, partition, choose the degree, build the
/// kernel, assemble, and maximize.
pub fn build_state(mut problems: Vec<LocalProblem>, opts: &BuildOptions) -> Result<SurrogateState> {
    if problems.is_empty() {
        return Err(SurrogateError::InvalidInput("empty problem family".into()));
    }
    let n = problems[0].ambient_dim();
    if problems.iter().any(|p| p.ambient_dim() != n) {
        return Err(SurrogateError::InvalidInput(
            "problems live in different ambient spaces".into(),
        ));
    }
    for p in &mut problems {
        if !p.is_solved() {
            p.solve()?;
        }
    }
    let carriers: Vec<Subspace> = problems.iter().map(|p| p.carrier().clone()).collect();
    let partition = build_partition(&carriers)?;
    let incidence = build_incidence(&partition);
    let r_data = choose_degree(&problems, &partition)?;
    let r = opts.degree.unwrap_or(r_data);
    if r > MAX_DEGREE {
        return Err(SurrogateError::DegreeCap(r));
    }
    let system = continuity_system(&partition, &incidence, r);
    let basis = kernel_basis(&system)?;
    let (v, empty) = assemble_v(&basis, partition.lambda(), n, r);
    let mut flags = Vec::new();
    if empty {
        flags.push("kernel basis is empty; the assembly is the zero function".into());
    }
    let interpolant = match canonical_pieces(
        &problems,
        &partition,
        &incidence,
        r,
        opts.degree,
        opts.samples,
    ) {
        Ok(f) => Some(f),
        Err(e @ SurrogateError::DegreeTooLow { .. }) if opts.degree.is_some() => return Err(e),
        Err(
            e @ (SurrogateError::ConflictingBoundary { .. }
            | SurrogateError::UnsupportedGeometry(_)
            | SurrogateError::DegreeTooLow { .. }),
        ) => {
            flags.push(format!("canonical member unavailable: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let region = match &opts.region {
        Some(r) => r.clone(),
        None => default_region(&problems)?,
    };
    let target = interpolant.as_ref().unwrap_or(&v);
    let report = maximize_v(target, &partition, &region)?;
    if report.degenerate_constant {
        flags.push("reconstruction is constant; region representative reported".into());
    }
    if let Some(excess) = report.complement_excess {
        flags.push(format!(
            "complement piece exceeds the carrier maxima by {excess:.3e} off the carriers"
        ));
    }
    Ok(SurrogateState {
        problems,
        partition,
        incidence,
        r,
        kernel_basis: basis,
        v,
        interpolant,
        maximal_elements: report.maximal_elements.iter().map(|p| Vector(p.clone())).collect(),
        maximal_values: report.values.clone(),
        region,
        flags,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveReport {
    pub r_before: usize,
    pub r_after: usize,
    /// Whether the refined degree stayed in {r, r+1}.
    pub degree_growth_ok: bool,
    pub duplicate: bool,
    pub lambda_before: usize,
    pub lambda_after: usize,
    /// Sampled agreement between the old assembly and the member of the new
    /// family obtained by carrying the old pieces over, off the new carrier.
    pub stability_samples: usize,
    pub stability_max_residual: f64,
    /// The carried-over member satisfies the new continuity system exactly.
    pub stability_member_exact: bool,
}

fn problems_equal(a: &LocalProblem, b: &LocalProblem) -> bool {
    let n = a.ambient_dim();
    qlin::same_span(a.exact_basis(), b.exact_basis(), n)
        && a.restrict_exact(&a.utility) == a.restrict_exact(&b.utility)
        && matches!(a.feasible.contains_set(&b.feasible, TOL), Ok(true))
        && matches!(b.feasible.contains_set(&a.feasible, TOL), Ok(true))
}

/// Refine a state with one more local problem: compatibility-check it
/// against the family, rebuild on the finer partition, verify the degree
/// growth bound, and check that the old assembly survives as a member of
/// the new family away from the new carrier.
pub fn evolve(
    state: &SurrogateState,
    mut new_problem: LocalProblem,
    opts: &BuildOptions,
) -> Result<(SurrogateState, EvolveReport)> {
    if !new_problem.is_solved() {
        new_problem.solve()?;
    }
    if state.problems.iter().any(|p| problems_equal(p, &new_problem)) {
        let report = EvolveReport {
            r_before: state.r,
            r_after: state.r,
            degree_growth_ok: true,
            duplicate: true,
            lambda_before: state.partition.lambda(),
            lambda_after: state.partition.lambda(),
            stability_samples: 0,
            stability_max_residual: 0.0,
            stability_member_exact: true,
        };
        return Ok((state.clone(), report));
    }
    for p in &state.problems {
        match problems::meet(p, &new_problem) {
            Ok(MeetResult::Incompatible { reason, .. }) => {
                return Err(SurrogateError::Incompatible {
                    with: p.id.clone(),
                    reason,
                })
            }
            Ok(MeetResult::Problem(_)) => {}
            Err(ProblemError::EmptyIntersection) | Err(ProblemError::UnsupportedShapes(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let mut all = state.problems.clone();
    all.push(new_problem);
    let new_state = build_state(all, opts)?;
    let degree_growth_ok = opts.degree.is_some()
        || new_state.r == state.r
        || new_state.r == state.r + 1;

    // Theorem-2 content: carry each old piece onto the new classes its
    // carrier contains; the result is an exactly-continuous member of the
    // new family that agrees with the old assembly off the new carrier.
    let carried = carry_over(&state.v, &state.partition, &new_state.partition);
    let stability_member_exact =
        carried.continuity_exact(&new_state.partition, &new_state.incidence);
    let new_carrier = new_state.problems.last().expect("nonempty").carrier().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut residual: f64 = 0.0;
    let mut drawn = 0usize;
    let mut tries = 0usize;
    while drawn < 1000 && tries < 20_000 {
        tries += 1;
        let k = rng.gen_range(0..state.problems.len());
        let x = problems::sample_in_feasible(&state.problems[k].feasible, &mut rng)?;
        if new_carrier.contains(&x, TOL) {
            continue;
        }
        let old = state.v.eval(&state.partition, &x);
        let new = carried.eval(&new_state.partition, &x);
        residual = residual.max((old - new).abs());
        drawn += 1;
    }
    let report = EvolveReport {
        r_before: state.r,
        r_after: new_state.r,
        degree_growth_ok,
        duplicate: false,
        lambda_before: state.partition.lambda(),
        lambda_after: new_state.partition.lambda(),
        stability_samples: drawn,
        stability_max_residual: residual,
        stability_member_exact,
    };
    Ok((new_state, report))
}

/// Assign to every class of the finer partition the old piece of the
/// smallest old class whose carrier contains its carrier.
fn carry_over(old: &PiecewiseFn, coarse: &Partition, fine: &Partition) -> PiecewiseFn {
    let n = coarse.ambient;
    let pieces = fine
        .classes
        .iter()
        .map(|fc| {
            let mut best: Option<(usize, usize)> = None; // (dim, index)
            for (c, oc) in coarse.classes.iter().enumerate() {
                if qlin::span_contained(fc.exact_basis(), oc.exact_basis(), n) {
                    let key = (oc.dim(), c);
                    if best.map_or(true, |b| key < b) {
                        best = Some(key);
                    }
                }
            }
            let (_, c) = best.expect("the full-space class contains everything");
            old.pieces[c].clone()
        })
        .collect();
    PiecewiseFn {
        pieces,
        degree: old.degree,
    }
}

// ---------------------------------------------------------------------------
// Convergence harness

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStep {
    pub m: usize,
    pub distance: f64,
    pub r: usize,
    pub lambda: usize,
    pub tau: usize,
    pub mu: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub steps: Vec<ConvergenceStep>,
    pub true_argmax: Vec<f64>,
    /// First step at which some feasible set contains the true argmax.
    pub covering_index: Option<usize>,
    /// Distance ≤ 1e-6 at every step from the covering index on.
    pub converged: bool,
    /// The sequence ran out (or hit the budget) without covering.
    pub budget_exhausted: bool,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,distance,r,lambda,tau,mu\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.m, s.distance, s.r, s.lambda, s.tau, s.mu
            ));
        }
        out
    }
}

/// Exact argmax of a strictly concave quadratic; falls back to a numeric
/// maximization over the data's bounding box for higher degree.
pub fn true_argmax(u: &QPoly, problems: &[LocalProblem]) -> Result<Vector> {
    let n = u.nvars();
    let full = Subspace::full(n);
    let report = solver::is_strictly_concave(&u.to_float(), &full);
    if !report.strictly_concave {
        return Err(SurrogateError::InvalidInput(
            "the true utility must be strictly concave".into(),
        ));
    }
    if u.degree().unwrap_or(0) <= 2 {
        let mut rows: Vec<QVec> = vec![vec![qzero(); n]; n];
        let mut grad0: QVec = vec![qzero(); n];
        for i in 0..n {
            grad0[i] = -u.coeff(&Monomial::var(n, i));
            for j in 0..n {
                let mut m = Monomial::unit(n);
                m.0[i] += 1;
                m.0[j] += 1;
                let c = u.coeff(&m);
                rows[i][j] = if i == j { qfrom_i64(2) * c } else { c };
            }
        }
        let h = QMat::from_rows(rows);
        let x = h
            .solve(&grad0)
            .ok_or_else(|| SurrogateError::InvalidInput("singular Hessian".into()))?;
        return Ok(Vector(x.iter().map(qto_f64).collect()));
    }
    let (lo, hi) = inflated_bbox(problems, 0.5)?;
    let region = FeasibleSet::new(
        Subspace::full(n),
        Shape::Box {
            lower: lo,
            upper: hi,
        },
    )?;
    let sol = solver::solve_local(&u.to_float(), &region)?;
    Ok(sol.points.first().cloned().ok_or_else(|| {
        SurrogateError::InvalidInput("no maximizer found for the true utility".into())
    })?)
}

/// Feed the problem sequence through the evolution loop, recording the
/// distance from the reported maxima to the true argmax at every step.
pub fn convergence_run(
    true_utility: &QPoly,
    sequence: Vec<LocalProblem>,
    budget: usize,
    opts: &BuildOptions,
) -> Result<ConvergenceReport> {
    if sequence.is_empty() {
        return Err(SurrogateError::InvalidInput("empty problem sequence".into()));
    }
    let x_hat = true_argmax(true_utility, &sequence)?;
    let take = sequence.len().min(budget.max(1));
    let mut notes = Vec::new();
    let mut steps = Vec::new();
    let mut covering: Option<usize> = None;
    let mut state: Option<SurrogateState> = None;
    for (m, problem) in sequence.into_iter().take(take).enumerate() {
        let covered_now = problem.feasible.contains_ambient(&x_hat, TOL);
        let next = match state.take() {
            None => build_state(vec![problem], opts)?,
            Some(s) => {
                let (ns, report) = evolve(&s, problem, opts)?;
                if !report.degree_growth_ok {
                    notes.push(format!(
                        "degree grew from {} to {} at step {m}",
                        report.r_before, report.r_after
                    ));
                }
                if report.stability_max_residual > TOL {
                    notes.push(format!(
                        "family stability residual {:.3e} at step {m}",
                        report.stability_max_residual
                    ));
                }
                ns
            }
        };
        if covering.is_none() && covered_now {
            covering = Some(m);
        }
        let distance = next
            .maximal_elements
            .iter()
            .map(|p| p.dist(&x_hat))
            .fold(f64::INFINITY, f64::min);
        steps.push(ConvergenceStep {
            m,
            distance,
            r: next.r,
            lambda: next.partition.lambda(),
            tau: next.incidence.tau(),
            mu: next.mu(),
        });
        state = Some(next);
    }
    let converged = covering
        .map(|mh| steps.iter().filter(|s| s.m >= mh).all(|s| s.distance <= WINNER_TOL))
        .unwrap_or(false);
    let budget_exhausted = covering.is_none();
    if budget_exhausted {
        notes.push("budget exhausted before any feasible set covered the true argmax".into());
    }
    Ok(ConvergenceReport {
        steps,
        true_argmax: x_hat.0,
        covering_index: covering,
        converged,
        budget_exhausted,
        notes,
    })
}

// ---------------------------------------------------------------------------
// Bridge to the module-kernel machinery

/// The incidence relation as restrict-then-sign constraint rows, the form
/// the module-Gröbner kernel computation consumes.
pub fn t_rows(partition: &Partition, incidence: &IncidenceMatrix) -> Vec<crate::groebner::TRow> {
    let n = partition.ambient;
    incidence
        .rows
        .iter()
        .map(|row| {
            let basis = partition.classes[row.lo].exact_basis().to_vec();
            let normals = qlin::complement(&basis, n);
            crate::groebner::TRow {
                entries: vec![(row.hi, 1), (row.lo, -1)],
                boundary_basis: basis,
                boundary_normals: normals,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groebner::{degree_slice_span, kernel_generators, ModuleOrder};
    use crate::poly::{demo_utility, qpoly};

    fn v(c: &[f64]) -> Vector {
        Vector(c.to_vec())
    }

    fn axis_box_problem(id: &str, axis: usize, u: QPoly) -> LocalProblem {
        let mut b = vec![0.0, 0.0];
        b[axis] = 1.0;
        let f = FeasibleSet::new(
            Subspace::new(2, &[v(&b)]).unwrap(),
            Shape::Box {
                lower: vec![0.0],
                upper: vec![1.0],
            },
        )
        .unwrap();
        let mut p = LocalProblem::new(id, f, u).unwrap();
        p.solve().unwrap();
        p
    }

    /// x-axis box [0,1] with 3 + x - x^2: maximum 13/4 at (1/2, 0).
    fn axis_x() -> LocalProblem {
        axis_box_problem("ax", 0, qpoly(2, &[(3, &[0, 0]), (1, &[1, 0]), (-1, &[2, 0])]))
    }

    /// y-axis box [0,1] with 3 + 2y - y^2: maximum 4 at (0, 1).
    fn axis_y() -> LocalProblem {
        axis_box_problem("ay", 1, qpoly(2, &[(3, &[0, 0]), (2, &[0, 1]), (-1, &[0, 2])]))
    }

    fn two_axes() -> Vec<LocalProblem> {
        vec![axis_x(), axis_y()]
    }

    fn axes_state() -> SurrogateState {
        build_state(two_axes(), &BuildOptions::default()).unwrap()
    }

    /// Segment [0,1] x {0} with utility x: maximum 1 at (1, 0).
    fn segment_problem() -> LocalProblem {
        let f = FeasibleSet::new(
            Subspace::new(2, &[v(&[1.0, 0.0])]).unwrap(),
            Shape::Box {
                lower: vec![0.0],
                upper: vec![1.0],
            },
        )
        .unwrap();
        let mut p = LocalProblem::new("seg", f, qpoly(2, &[(1, &[1, 0])])).unwrap();
        p.solve().unwrap();
        p
    }

    /// Triangle x+y<=1, x,y>=0 with utility x + 2y: maximum 2 at (0, 1).
    fn triangle_problem() -> LocalProblem {
        let f = FeasibleSet::new(
            Subspace::full(2),
            Shape::Polytope {
                a: vec![vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
                b: vec![1.0, 0.0, 0.0],
            },
        )
        .unwrap();
        let mut p =
            LocalProblem::new("tri", f, qpoly(2, &[(1, &[1, 0]), (2, &[0, 1])])).unwrap();
        p.solve().unwrap();
        p
    }

    /// Full-plane box [0,1]^2 with the two-axis demonstration utility:
    /// maximum 17/4 at (1/2, 1).
    fn full_box_problem() -> LocalProblem {
        let f = FeasibleSet::new(
            Subspace::full(2),
            Shape::Box {
                lower: vec![0.0, 0.0],
                upper: vec![1.0, 1.0],
            },
        )
        .unwrap();
        let mut p = LocalProblem::new("box", f, demo_utility()).unwrap();
        p.solve().unwrap();
        p
    }

    /// Coordinate plane span{e1, e_t} in R^3 carrying W(x) = -x^6+2x^4-x^2
    /// minus the square of the transverse coordinate: three maxima of value
    /// zero at x in {-1, 0, 1} on the shared x-axis.
    fn w_plane_problem(id: &str, transverse: usize) -> LocalProblem {
        let mut b2 = vec![0.0; 3];
        b2[transverse] = 1.0;
        let f = FeasibleSet::new(
            Subspace::new(3, &[v(&[1.0, 0.0, 0.0]), v(&b2)]).unwrap(),
            Shape::Box {
                lower: vec![-2.0, -2.0],
                upper: vec![2.0, 2.0],
            },
        )
        .unwrap();
        let mut tsq = vec![0u32; 3];
        tsq[transverse] = 2;
        let u = QPoly::from_terms(
            3,
            [
                (Monomial(vec![6, 0, 0]), -qone()),
                (Monomial(vec![4, 0, 0]), qfrom_i64(2)),
                (Monomial(vec![2, 0, 0]), -qone()),
                (Monomial(tsq), -qone()),
            ],
        );
        let mut p = LocalProblem::new(id, f, u).unwrap();
        p.solve().unwrap();
        assert_eq!(p.solutions.len(), 3, "W hosts three maxima");
        p
    }

    fn w_planes() -> (Vec<LocalProblem>, Partition, IncidenceMatrix) {
        let problems = vec![w_plane_problem("pxy", 1), w_plane_problem("pxz", 2)];
        let carriers: Vec<Subspace> = problems.iter().map(|p| p.carrier().clone()).collect();
        let partition = build_partition(&carriers).unwrap();
        let incidence = build_incidence(&partition);
        (problems, partition, incidence)
    }

    #[test]
    fn degree_law_is_zero_only_without_maxima() {
        let partition = build_partition(&[Subspace::new(2, &[v(&[1.0, 0.0])]).unwrap()]).unwrap();
        assert_eq!(choose_degree(&[], &partition).unwrap(), 0);
    }

    #[test]
    fn degree_law_floors_at_two() {
        let single = axis_x();
        let partition = build_partition(&[single.carrier().clone()]).unwrap();
        assert_eq!(choose_degree(&[single], &partition).unwrap(), 2);

        let problems = two_axes();
        let carriers: Vec<Subspace> = problems.iter().map(|p| p.carrier().clone()).collect();
        let partition = build_partition(&carriers).unwrap();
        assert_eq!(choose_degree(&problems, &partition).unwrap(), 2);
    }

    #[test]
    fn degree_law_counts_cohosted_maxima() {
        let (problems, partition, _) = w_planes();
        let hosted = hosted_maxima(&problems, &partition).unwrap();
        // the shared x-axis is the intersection class, third in input order
        assert_eq!(hosted[2].len(), 3);
        assert_eq!(choose_degree(&problems, &partition).unwrap(), 3);
    }

    #[test]
    fn axes_pieces_are_the_peaked_quadratics() {
        let problems = two_axes();
        let carriers: Vec<Subspace> = problems.iter().map(|p| p.carrier().clone()).collect();
        let partition = build_partition(&carriers).unwrap();
        let incidence = build_incidence(&partition);
        let f = canonical_pieces(&problems, &partition, &incidence, 2, None, 64).unwrap();
        assert_eq!(f.degree, 2);
        assert_eq!(
            f.pieces[0],
            qpoly(2, &[(3, &[0, 0]), (1, &[1, 0]), (-1, &[2, 0]), (-1, &[0, 2])])
        );
        assert_eq!(
            f.pieces[1],
            qpoly(2, &[(3, &[0, 0]), (2, &[0, 1]), (-1, &[0, 2]), (-1, &[2, 0])])
        );
        assert_eq!(f.pieces[2], qpoly(2, &[(3, &[0, 0])]));
        assert!(f.continuity_exact(&partition, &incidence));
        assert!(f.continuity_residual(&partition, &incidence, 100, 11) <= 1e-9);
    }

    #[test]
    fn conflicting_peaks_are_rejected() {
        let problems = vec![segment_problem(), triangle_problem()];
        let carriers: Vec<Subspace> = problems.iter().map(|p| p.carrier().clone()).collect();
        let partition = build_partition(&carriers).unwrap();
        let incidence = build_incidence(&partition);
        // 1 - (x-1)^2 - y^2 and 2 - x^2 - (y-1)^2 differ on the x-axis,
        // which sits behind the pure triangle class in the class order
        let err = canonical_pieces(&problems, &partition, &incidence, 2, None, 64).unwrap_err();
        assert!(matches!(err, SurrogateError::ConflictingBoundary { class: 1, .. }));
    }

    #[test]
    fn conflict_falls_back_to_the_basis_assembly() {
        let state =
            build_state(vec![segment_problem(), triangle_problem()], &BuildOptions::default())
                .unwrap();
        assert!(state.interpolant.is_none());
        assert!(state
            .flags
            .iter()
            .any(|f| f.contains("canonical member unavailable")));
        assert_eq!(state.r, 2);
        assert!(state.v.continuity_exact(&state.partition, &state.incidence));
    }

    #[test]
    fn axes_continuity_system_dimensions() {
        let state = axes_state();
        let system = continuity_system(&state.partition, &state.incidence, 2);
        assert_eq!(system.unknowns(), 24);
        assert_eq!(system.rows, 8);
        assert_eq!(system.rank(), 7);
        let basis = kernel_basis(&system).unwrap();
        assert_eq!(basis.len(), 17);
        assert!(basis
            .iter()
            .all(|f| f.continuity_exact(&state.partition, &state.incidence)));
    }

    #[test]
    fn full_overlap_forces_identical_pieces() {
        let identity = vec![vec![qone(), qzero()], vec![qzero(), qone()]];
        let system = continuity_rows(2, 2, 2, &[(0, 1, identity)]);
        let basis = kernel_basis(&system).unwrap();
        assert_eq!(basis.len(), 6);
        assert!(basis.iter().all(|f| f.pieces[0] == f.pieces[1]));
    }

    #[test]
    fn origin_boundary_only_ties_the_constants() {
        let system = continuity_rows(2, 2, 1, &[(0, 1, vec![])]);
        assert_eq!(system.unknowns(), 6);
        assert_eq!(kernel_basis(&system).unwrap().len(), 5);
    }

    #[test]
    fn empty_incidence_is_unconstrained() {
        let system = continuity_rows(1, 2, 2, &[]);
        assert_eq!(kernel_basis(&system).unwrap().len(), 6);
    }

    #[test]
    fn fit_without_data_is_zero() {
        let (piece, residual) = fit_alpha(2, 2, &[], &[]).unwrap();
        assert!(piece.is_zero());
        assert_eq!(residual, 0.0);
    }

    #[test]
    fn fit_reproduces_a_constant_boundary() {
        let constraints = vec![(
            QPoly::constant(2, qfrom_i64(5)),
            vec![vec![qone(), qzero()]],
        )];
        let targets = vec![(vec![0.3, 0.7], 5.0), (vec![0.9, 0.2], 5.0)];
        let (piece, residual) = fit_alpha(2, 2, &constraints, &targets).unwrap();
        assert_eq!(piece, qpoly(2, &[(5, &[0, 0])]));
        assert!(residual <= 1e-12);
    }

    #[test]
    fn empty_kernel_assembles_to_zero() {
        let (f, empty) = assemble_v(&[], 3, 2, 2);
        assert!(empty);
        assert!(f.pieces.iter().all(|p| p.is_zero()));
    }

    #[test]
    fn single_problem_pipeline_reports_the_box_peak() {
        let state = build_state(vec![full_box_problem()], &BuildOptions::default()).unwrap();
        assert_eq!(state.partition.lambda(), 1);
        assert_eq!(state.incidence.tau(), 0);
        assert_eq!(state.r, 2);
        assert_eq!(state.kernel_basis.len(), 6);
        assert_eq!(state.maximal_elements.len(), 1);
        assert!(state.maximal_elements[0].approx_eq(&v(&[0.5, 1.0]), 1e-9));
        assert!((state.maximal_values[0] - 4.25).abs() <= 1e-12);
        let f = state.interpolant.as_ref().unwrap();
        assert!((f.eval(&state.partition, &v(&[0.5, 1.0])) - 4.25).abs() <= 1e-12);
        assert!((f.eval(&state.partition, &v(&[0.0, 0.0])) - 3.0).abs() <= 1e-12);
    }

    #[test]
    fn axes_pipeline_excludes_the_complement_winner() {
        let state = axes_state();
        assert_eq!(state.r, 2);
        assert_eq!(state.kernel_basis.len(), 17);
        assert_eq!(state.mu(), 1);
        assert!(state.maximal_elements[0].approx_eq(&v(&[0.0, 1.0]), 1e-9));
        assert!((state.maximal_values[0] - 4.0).abs() <= 1e-9);
        assert!(state.interpolant.is_some());
        let residual =
            state
                .reconstruction()
                .continuity_residual(&state.partition, &state.incidence, 100, 23);
        assert!(residual <= 1e-9, "continuity residual {residual}");
    }

    #[test]
    fn cohosted_maxima_share_one_sextic_piece() {
        let (problems, partition, incidence) = w_planes();
        let f = canonical_pieces(&problems, &partition, &incidence, 3, None, 27).unwrap();
        let expected = qpoly(
            3,
            &[
                (-1, &[6, 0, 0]),
                (2, &[4, 0, 0]),
                (-1, &[2, 0, 0]),
                (-1, &[0, 2, 0]),
                (-1, &[0, 0, 2]),
            ],
        );
        assert_eq!(f.degree, 6);
        assert_eq!(f.pieces[0], expected);
        assert_eq!(f.pieces[1], expected);
        assert_eq!(f.pieces[2], expected);
        assert!(f.continuity_exact(&partition, &incidence));
    }

    #[test]
    fn non_collinear_maxima_are_unsupported() {
        let h = |x: f64, y: f64| HostedMax {
            point: v(&[x, y]),
            value: 0.0,
            exact_point: vec![qfrom_f64(x), qfrom_f64(y)],
            exact_value: qzero(),
        };
        let err = multi_max_piece(2, &[h(1.0, 0.0), h(0.0, 1.0), h(1.0, 1.0)]).unwrap_err();
        assert!(matches!(err, SurrogateError::UnsupportedGeometry(_)));
    }

    #[test]
    fn degree_override_below_the_data_is_an_error() {
        let opts = BuildOptions {
            degree: Some(1),
            ..BuildOptions::default()
        };
        let err = build_state(two_axes(), &opts).unwrap_err();
        assert!(matches!(
            err,
            SurrogateError::DegreeTooLow {
                given: 1,
                required: 2
            }
        ));
    }

    #[test]
    fn degree_override_above_the_cap_is_an_error() {
        let opts = BuildOptions {
            degree: Some(9),
            ..BuildOptions::default()
        };
        let err = build_state(two_axes(), &opts).unwrap_err();
        assert!(matches!(err, SurrogateError::DegreeCap(9)));
    }

    #[test]
    fn evolving_with_a_diagonal_problem_keeps_the_degree() {
        let state = axes_state();
        let f = FeasibleSet::new(
            Subspace::new(2, &[v(&[1.0, 1.0])]).unwrap(),
            Shape::Box {
                lower: vec![0.0],
                upper: vec![1.2],
            },
        )
        .unwrap();
        let mut diag = LocalProblem::new("diag", f, demo_utility()).unwrap();
        diag.solve().unwrap();
        let (next, report) = evolve(&state, diag, &BuildOptions::default()).unwrap();
        assert!(!report.duplicate);
        assert_eq!(report.r_before, 2);
        assert_eq!(report.r_after, 2);
        assert!(report.degree_growth_ok);
        assert_eq!(report.lambda_before, 4);
        assert_eq!(report.lambda_after, 5);
        assert_eq!(report.stability_samples, 1000);
        assert!(report.stability_max_residual <= 1e-9);
        assert!(report.stability_member_exact);
        // the diagonal hosts the best maximum: 3 + 9/4 - 9/8 = 33/8 at (3/4, 3/4)
        assert!(next.interpolant.is_some());
        assert_eq!(next.mu(), 1);
        assert!(next.maximal_elements[0].approx_eq(&v(&[0.75, 0.75]), 1e-9));
        assert!((next.maximal_values[0] - 4.125).abs() <= 1e-9);
    }

    #[test]
    fn evolving_with_a_duplicate_is_a_no_op() {
        let state = axes_state();
        let again = axis_box_problem("ax2", 0, qpoly(2, &[(3, &[0, 0]), (1, &[1, 0]), (-1, &[2, 0])]));
        let (next, report) = evolve(&state, again, &BuildOptions::default()).unwrap();
        assert!(report.duplicate);
        assert_eq!(next.problems.len(), 2);
        assert_eq!(next.r, 2);
    }

    #[test]
    fn evolving_with_inconsistent_data_is_rejected() {
        let state = axes_state();
        let clash = axis_box_problem("clash", 0, qpoly(2, &[(1, &[1, 0])]));
        let err = evolve(&state, clash, &BuildOptions::default()).unwrap_err();
        match err {
            SurrogateError::Incompatible { with, .. } => assert_eq!(with, "ax"),
            other => panic!("expected Incompatible, got {other:?}"),
        }
    }

    #[test]
    fn maximize_reports_a_constant_family_degenerately() {
        let partition = build_partition(&[Subspace::new(2, &[v(&[1.0, 0.0])]).unwrap()]).unwrap();
        let f = PiecewiseFn {
            pieces: vec![QPoly::constant(2, qfrom_i64(2)); 2],
            degree: 0,
        };
        let region = FeasibleSet::new(
            Subspace::full(2),
            Shape::Box {
                lower: vec![0.0, 0.0],
                upper: vec![1.0, 1.0],
            },
        )
        .unwrap();
        let report = maximize_v(&f, &partition, &region).unwrap();
        assert!(report.degenerate_constant);
        assert_eq!(report.maximal_elements.len(), 1);
        assert_eq!(report.values, vec![2.0]);
    }

    #[test]
    fn unbounded_regions_are_rejected() {
        let partition = build_partition(&[Subspace::new(2, &[v(&[1.0, 0.0])]).unwrap()]).unwrap();
        let f = PiecewiseFn {
            pieces: vec![QPoly::constant(2, qfrom_i64(2)); 2],
            degree: 0,
        };
        // bypass FeasibleSet::new, which would reject the half-plane itself
        let region = FeasibleSet {
            carrier: Subspace::full(2),
            shape: Shape::Polytope {
                a: vec![vec![-1.0, 0.0]],
                b: vec![0.0],
            },
        };
        let err = maximize_v(&f, &partition, &region).unwrap_err();
        assert!(matches!(err, SurrogateError::UnboundedRegion));
    }

    #[test]
    fn covering_sequence_converges_at_the_covering_index() {
        let report = convergence_run(
            &demo_utility(),
            vec![axis_x(), axis_y(), full_box_problem()],
            9,
            &BuildOptions::default(),
        )
        .unwrap();
        assert_eq!(report.true_argmax, vec![0.5, 1.0]);
        assert_eq!(report.covering_index, Some(2));
        assert!(report.converged);
        assert!(!report.budget_exhausted);
        assert!((report.steps[0].distance - 1.0).abs() <= 1e-9);
        assert!((report.steps[1].distance - 0.5).abs() <= 1e-9);
        assert!(report.steps[2].distance <= 1e-6);
        // the full-plane input absorbs the complement class
        assert_eq!(report.steps[2].lambda, 4);
        assert_eq!(report.steps[2].tau, 4);
        assert!(report.notes.is_empty());
        assert_eq!(report.to_csv().lines().count(), 4);
        assert!(report.to_csv().starts_with("m,distance,r,lambda,tau,mu\n"));
    }

    #[test]
    fn uncovered_sequence_exhausts_the_budget() {
        let report = convergence_run(
            &demo_utility(),
            vec![axis_x(), axis_y()],
            9,
            &BuildOptions::default(),
        )
        .unwrap();
        assert_eq!(report.covering_index, None);
        assert!(!report.converged);
        assert!(report.budget_exhausted);
        assert!((report.steps[1].distance - 0.5).abs() <= 1e-9);
        assert!(report.notes.iter().any(|n| n.contains("budget exhausted")));
    }

    #[test]
    fn kernel_agrees_with_the_module_slice() {
        let state = axes_state();
        let rows = t_rows(&state.partition, &state.incidence);
        let gens = kernel_generators(4, 2, &rows, &ModuleOrder::TOP_GREVLEX).unwrap();
        let slice = degree_slice_span(&gens, 4, 2, 2).unwrap();
        let monos = monomials_up_to(2, 2);
        let ours: Vec<QVec> = state
            .kernel_basis
            .iter()
            .map(|f| piecewise_to_vector(f, &monos))
            .collect();
        assert_eq!(slice.len(), 17);
        assert_eq!(ours.len(), 17);
        assert_eq!(QMat::from_rows(slice.clone()).rank(), 17);
        let mut stacked = ours.clone();
        stacked.extend(slice);
        assert_eq!(QMat::from_rows(stacked).rank(), 17);
    }

    #[test]
    fn state_snapshot_carries_the_headline_numbers() {
        let state = axes_state();
        let json = state.to_json();
        assert_eq!(json["r"], 2);
        assert_eq!(json["lambda"], 4);
        assert_eq!(json["tau"], 4);
        assert_eq!(json["kernel_dimension"], 17);
        assert_eq!(json["mu"], 1);
    }
}
