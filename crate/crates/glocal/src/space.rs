//! Ambient space primitives: vectors, linear subspaces with orthonormal
//! bases, affine sets, and feasible regions (boxes, polytopes, balls) living
//! inside carrier subspaces.
//!
//! The central map is [`feasible_projection`]: project a point onto the
//! feasible set's carrier, then take the closest feasible point. All three
//! shape kinds are convex, so the closest point is unique; the API is still
//! set-valued so ties can be reported if other shapes ever appear.
//!
//! Polytopes are handled by exhaustive basic-solution enumeration instead of
//! an LP solver: at the supported scale (carrier dimension <= 4, a handful of
//! rows) this is exact, deterministic and dependency-free. Boundedness is
//! decided through the recession cone, feasibility through vertex existence,
//! and projections through active-set enumeration.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const ORTHO_TOL: f64 = 1e-12;
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis is not orthonormal within {0}")]
    NotOrthonormal(f64),
    #[error("feasible set is empty")]
    EmptyFeasible,
    #[error("polytope is unbounded")]
    UnboundedPolytope,
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
}

type Result<T> = std::result::Result<T, SpaceError>;

/// A point of the ambient space R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(pub Vec<f64>);

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.sub(other).norm()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * c).collect())
    }

    pub fn approx_eq(&self, other: &Vector, tol: f64) -> bool {
        self.dim() == other.dim() && self.dist(other) <= tol
    }

    /// Total order for deterministic output listings.
    pub fn lex_cmp(&self, other: &Vector) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

/// Deduplicate a point list under `tol`, then sort lexicographically.
pub fn dedup_points(points: Vec<Vector>, tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for p in points {
        if !out.iter().any(|q| q.approx_eq(&p, tol)) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| a.lex_cmp(b));
    out
}

/// Linear subspace through the origin, stored as an orthonormal basis.
/// The zero subspace has an empty basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    /// Orthonormalize a spanning set (modified Gram-Schmidt with one
    /// re-orthogonalization pass); dependent directions are dropped.
    pub fn new(ambient: usize, spanning: &[Vector]) -> Result<Self> {
        let mut basis: Vec<Vector> = Vec::new();
        for v in spanning {
            if v.dim() != ambient {
                return Err(SpaceError::DimensionMismatch {
                    expected: ambient,
                    got: v.dim(),
                });
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = w.dot(b);
                    w = w.sub(&b.scale(c));
                }
            }
            let norm = w.norm();
            if norm > 1e-10 {
                basis.push(w.scale(1.0 / norm));
            }
        }
        Ok(Subspace { ambient, basis })
    }

    /// Accept a basis that is already orthonormal within 1e-9.
    pub fn from_orthonormal(ambient: usize, basis: Vec<Vector>) -> Result<Self> {
        for (i, a) in basis.iter().enumerate() {
            if a.dim() != ambient {
                return Err(SpaceError::DimensionMismatch {
                    expected: ambient,
                    got: a.dim(),
                });
            }
            for (j, b) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - want).abs() > 1e-9 {
                    return Err(SpaceError::NotOrthonormal(1e-9));
                }
            }
        }
        Ok(Subspace { ambient, basis })
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                Vector(v)
            })
            .collect();
        Subspace { ambient: n, basis }
    }

    pub fn origin(n: usize) -> Self {
        Subspace {
            ambient: n,
            basis: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, x: &Vector) -> Vector {
        let mut out = Vector::zeros(self.ambient);
        for b in &self.basis {
            out = out.add(&b.scale(x.dot(b)));
        }
        out
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.project(x).dist(x) <= tol
    }

    /// Coordinates of x with respect to the basis (meaningful when x lies in
    /// the subspace; otherwise these are the coordinates of the projection).
    pub fn coords(&self, x: &Vector) -> Vec<f64> {
        self.basis.iter().map(|b| x.dot(b)).collect()
    }

    pub fn embed(&self, t: &[f64]) -> Vector {
        assert_eq!(t.len(), self.dim());
        let mut out = Vector::zeros(self.ambient);
        for (c, b) in t.iter().zip(&self.basis) {
            out = out.add(&b.scale(*c));
        }
        out
    }

    pub fn complement(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient);
        }
        let m = DMatrix::from_fn(self.dim(), self.ambient, |r, c| self.basis[r].0[c]);
        let basis = nullspace_rows(&m, 1e-10)
            .into_iter()
            .map(Vector)
            .collect();
        Subspace {
            ambient: self.ambient,
            basis,
        }
    }

    pub fn same_space(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient == other.ambient
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b, tol))
    }

    pub fn contains_subspace(&self, other: &Subspace, tol: f64) -> bool {
        other.basis.iter().all(|b| self.contains(b, tol))
    }
}

/// Orthonormal basis of the right nullspace of `m`, via SVD (rows padded so
/// the decomposition always carries a full V). Deterministic signs: largest
/// entry by magnitude positive.
pub fn nullspace_rows(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let n = m.ncols();
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let scale = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * scale.max(1.0);
    let mut out = Vec::new();
    for i in 0..n {
        let sv = if i < svd.singular_values.len() {
            svd.singular_values[i]
        } else {
            0.0
        };
        if sv <= cutoff {
            let mut v: Vec<f64> = v_t.row(i).iter().cloned().collect();
            let mut best = 0;
            for (k, &x) in v.iter().enumerate() {
                if x.abs() > v[best].abs() {
                    best = k;
                }
            }
            if v[best] < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            out.push(v);
        }
    }
    out
}

/// Intersection of subspaces: x lies in every S_i iff (I - P_i) x = 0 for
/// all i; stack those operators and take the nullspace.
pub fn intersect_subspaces(spaces: &[Subspace]) -> Result<Subspace> {
    let Some(first) = spaces.first() else {
        return Err(SpaceError::InvalidShape("empty subspace list".into()));
    };
    let n = first.ambient_dim();
    for s in spaces {
        if s.ambient_dim() != n {
            return Err(SpaceError::DimensionMismatch {
                expected: n,
                got: s.ambient_dim(),
            });
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for s in spaces {
        let comp = s.complement();
        for b in comp.basis() {
            rows.push(b.0.clone());
        }
    }
    if rows.is_empty() {
        return Ok(Subspace::full(n));
    }
    let m = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    let basis = nullspace_rows(&m, 1e-10).into_iter().map(Vector).collect();
    Ok(Subspace { ambient: n, basis })
}

/// Affine set: point + directions.
#[derive(Debug, Clone)]
pub struct AffineSet {
    pub point: Vector,
    pub directions: Subspace,
}

impl AffineSet {
    pub fn single_point(p: Vector) -> Self {
        let n = p.dim();
        AffineSet {
            point: p,
            directions: Subspace::origin(n),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        let d = x.sub(&self.point);
        self.directions.project(&d).dist(&d) <= tol
    }

    /// Linear constraints c . x = c . point, one row per complement basis
    /// vector of the direction space.
    pub fn constraints(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let comp = self.directions.complement();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for c in comp.basis() {
            rows.push(c.0.clone());
            rhs.push(c.dot(&self.point));
        }
        (rows, rhs)
    }
}

/// Result of intersecting affine sets: the least-squares witness, the
/// direction space of the solution set, and the constraint residual (which is
/// only ~0 when the system is consistent).
#[derive(Debug, Clone)]
pub struct AffineIntersection {
    pub witness: Vector,
    pub directions: Subspace,
    pub residual: f64,
    pub rank: usize,
    pub rows: usize,
}

pub fn intersect_affine(sets: &[AffineSet]) -> Result<AffineIntersection> {
    let Some(first) = sets.first() else {
        return Err(SpaceError::InvalidShape("empty affine set list".into()));
    };
    let n = first.point.dim();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for s in sets {
        if s.point.dim() != n {
            return Err(SpaceError::DimensionMismatch {
                expected: n,
                got: s.point.dim(),
            });
        }
        let (r, b) = s.constraints();
        rows.extend(r);
        rhs.extend(b);
    }
    if rows.is_empty() {
        return Ok(AffineIntersection {
            witness: Vector::zeros(n),
            directions: Subspace::full(n),
            residual: 0.0,
            rank: 0,
            rows: 0,
        });
    }
    let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    let b = DVector::from_vec(rhs.clone());
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-10)
        .map_err(|e| SpaceError::InvalidShape(format!("svd solve failed: {e}")))?;
    let witness = Vector(x.iter().cloned().collect());
    let residual = (&a * &x - &b).amax();
    let scale = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * scale.max(1.0))
        .count();
    let directions = Subspace {
        ambient: n,
        basis: nullspace_rows(&a, 1e-10).into_iter().map(Vector).collect(),
    };
    Ok(AffineIntersection {
        witness,
        directions,
        residual,
        rank,
        rows: rows.len(),
    })
}

/// Feasible region shape, in carrier coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Polytope { a: Vec<Vec<f64>>, b: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

/// A compact convex feasible set inside a carrier subspace.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    pub carrier: Subspace,
    pub shape: Shape,
}

impl FeasibleSet {
    pub fn new(carrier: Subspace, shape: Shape) -> Result<Self> {
        let d = carrier.dim();
        match &shape {
            Shape::Box { lower, upper } => {
                if lower.len() != d || upper.len() != d {
                    return Err(SpaceError::DimensionMismatch {
                        expected: d,
                        got: lower.len().max(upper.len()),
                    });
                }
                if lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return Err(SpaceError::EmptyFeasible);
                }
            }
            Shape::Polytope { a, b } => {
                if a.len() != b.len() {
                    return Err(SpaceError::InvalidShape(
                        "polytope row/rhs count mismatch".into(),
                    ));
                }
                for row in a {
                    if row.len() != d {
                        return Err(SpaceError::DimensionMismatch {
                            expected: d,
                            got: row.len(),
                        });
                    }
                }
                if d > 0 {
                    if !polytope_bounded(a, d)? {
                        return Err(SpaceError::UnboundedPolytope);
                    }
                    if polytope_vertices(a, b, d)?.is_empty() {
                        return Err(SpaceError::EmptyFeasible);
                    }
                } else if b.iter().any(|&bi| bi < -FEAS_TOL) {
                    return Err(SpaceError::EmptyFeasible);
                }
            }
            Shape::Ball { center, radius } => {
                if center.len() != d {
                    return Err(SpaceError::DimensionMismatch {
                        expected: d,
                        got: center.len(),
                    });
                }
                if *radius < 0.0 {
                    return Err(SpaceError::EmptyFeasible);
                }
            }
        }
        Ok(FeasibleSet { carrier, shape })
    }

    pub fn ambient_dim(&self) -> usize {
        self.carrier.ambient_dim()
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }

    pub fn shape_contains(&self, t: &[f64], tol: f64) -> bool {
        match &self.shape {
            Shape::Box { lower, upper } => t
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (l, u))| *x >= l - tol && *x <= u + tol),
            Shape::Polytope { a, b } => a
                .iter()
                .zip(b)
                .all(|(row, bi)| dot_slice(row, t) <= bi + tol),
            Shape::Ball { center, radius } => {
                dist_slice(t, center) <= radius + tol
            }
        }
    }

    pub fn contains_ambient(&self, x: &Vector, tol: f64) -> bool {
        if !self.carrier.contains(x, tol) {
            return false;
        }
        self.shape_contains(&self.carrier.coords(x), tol)
    }

    /// Closest point of the shape to `t` (carrier coordinates).
    pub fn closest_in_shape(&self, t: &[f64]) -> Result<Vec<f64>> {
        match &self.shape {
            Shape::Box { lower, upper } => Ok(t
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (l, u))| x.max(*l).min(*u))
                .collect()),
            Shape::Ball { center, radius } => {
                let d = dist_slice(t, center);
                if d <= *radius {
                    Ok(t.to_vec())
                } else {
                    Ok(center
                        .iter()
                        .zip(t)
                        .map(|(c, x)| c + (x - c) * radius / d)
                        .collect())
                }
            }
            Shape::Polytope { a, b } => project_to_polytope(t, a, b),
        }
    }

    /// Axis-aligned bounding box in carrier coordinates.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.shape {
            Shape::Box { lower, upper } => Ok((lower.clone(), upper.clone())),
            Shape::Ball { center, radius } => Ok((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            Shape::Polytope { a, b } => {
                let d = self.dim();
                if d == 0 {
                    return Ok((vec![], vec![]));
                }
                let verts = polytope_vertices(a, b, d)?;
                if verts.is_empty() {
                    return Err(SpaceError::EmptyFeasible);
                }
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for v in &verts {
                    for i in 0..d {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                Ok((lo, hi))
            }
        }
    }

    /// Extreme points in carrier coordinates, for polytopal shapes.
    pub fn shape_vertices(&self) -> Result<Vec<Vec<f64>>> {
        let d = self.dim();
        match &self.shape {
            Shape::Box { lower, upper } => {
                if d == 0 {
                    return Ok(vec![vec![]]);
                }
                let mut out = Vec::with_capacity(1 << d);
                for mask in 0..(1usize << d) {
                    out.push(
                        (0..d)
                            .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                            .collect(),
                    );
                }
                Ok(out)
            }
            Shape::Polytope { a, b } => {
                if d == 0 {
                    return Ok(vec![vec![]]);
                }
                polytope_vertices(a, b, d)
            }
            Shape::Ball { .. } => Err(SpaceError::InvalidShape(
                "balls have no vertex representation".into(),
            )),
        }
    }

    /// A deterministic interior-ish representative (bounding box center
    /// clamped to the shape), embedded in the ambient space.
    pub fn representative(&self) -> Result<Vector> {
        let (lo, hi) = self.bounding_box()?;
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| 0.5 * (l + u)).collect();
        let t = self.closest_in_shape(&mid)?;
        Ok(self.carrier.embed(&t))
    }

    /// Whether `other`'s region is contained in self's (tolerance 1e-9).
    pub fn contains_set(&self, other: &FeasibleSet, tol: f64) -> Result<bool> {
        match &other.shape {
            Shape::Box { .. } | Shape::Polytope { .. } => {
                for v in other.shape_vertices()? {
                    let x = other.carrier.embed(&v);
                    if !self.contains_ambient(&x, tol) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Shape::Ball { center, radius } => {
                let c = other.carrier.embed(center);
                if !self.carrier.contains(&c, tol) {
                    return Ok(false);
                }
                for b in other.carrier.basis() {
                    if *radius > tol && !self.carrier.contains(b, tol) {
                        return Ok(false);
                    }
                }
                match &self.shape {
                    Shape::Ball {
                        center: sc,
                        radius: sr,
                    } => {
                        let scv = self.carrier.embed(sc);
                        Ok(c.dist(&scv) + radius <= sr + tol)
                    }
                    Shape::Box { lower, upper } => {
                        // per halfspace +-e_i: sup over the ball of the linear
                        // functional t_i, computed in ambient terms
                        let rows = box_rows(lower, upper);
                        self.ball_in_halfspaces(&rows.0, &rows.1, other, center, *radius, tol)
                    }
                    Shape::Polytope { a, b } => {
                        self.ball_in_halfspaces(a, b, other, center, *radius, tol)
                    }
                }
            }
        }
    }

    fn ball_in_halfspaces(
        &self,
        a: &[Vec<f64>],
        b: &[f64],
        other: &FeasibleSet,
        center: &[f64],
        radius: f64,
        tol: f64,
    ) -> Result<bool> {
        let c = other.carrier.embed(center);
        for (row, bi) in a.iter().zip(b) {
            // ambient functional v . x representing row . coords(x)
            let v = self.carrier.embed(row);
            let g = other.carrier.coords(&v);
            let sup = v.dot(&c) + radius * norm_slice(&g);
            if sup > bi + tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn box_rows(lower: &[f64], upper: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = lower.len();
    let mut a = Vec::with_capacity(2 * d);
    let mut b = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut row = vec![0.0; d];
        row[i] = 1.0;
        a.push(row.clone());
        b.push(upper[i]);
        row[i] = -1.0;
        a.push(row);
        b.push(-lower[i]);
    }
    (a, b)
}

fn dot_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_slice(a: &[f64]) -> f64 {
    dot_slice(a, a).sqrt()
}

fn dist_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All vertices (basic feasible solutions) of {x : Ax <= b} in R^d.
pub fn polytope_vertices(a: &[Vec<f64>], b: &[f64], d: usize) -> Result<Vec<Vec<f64>>> {
    let m = a.len();
    if m < d {
        return Ok(Vec::new());
    }
    if binomial_count(m, d) > 2_000_000 {
        return Err(SpaceError::CapExceeded(format!(
            "vertex enumeration over {m} rows in dimension {d}"
        )));
    }
    let mut verts: Vec<Vec<f64>> = Vec::new();
    combinations(m, d, |rows| {
        let sub = DMatrix::from_fn(d, d, |r, c| a[rows[r]][c]);
        let rhs = DVector::from_fn(d, |r, _| b[rows[r]]);
        let lu = sub.clone().lu();
        if let Some(x) = lu.solve(&rhs) {
            // reject near-singular systems via residual
            let res = (&sub * &x - &rhs).amax();
            if !res.is_finite() || res > 1e-7 {
                return;
            }
            let v: Vec<f64> = x.iter().cloned().collect();
            if v.iter().any(|c| !c.is_finite() || c.abs() > 1e12) {
                return;
            }
            if a.iter()
                .zip(b)
                .all(|(row, bi)| dot_slice(row, &v) <= bi + 1e-7)
            {
                if !verts.iter().any(|w| dist_slice(w, &v) <= 1e-7) {
                    verts.push(v);
                }
            }
        }
    });
    verts.sort_by(|p, q| {
        p.iter()
            .zip(q)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(verts)
}

fn binomial_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Bounded iff the recession cone {d : Ad <= 0} is trivial: restricted to the
/// unit box, every coordinate extreme of the cone must be ~0.
pub fn polytope_bounded(a: &[Vec<f64>], d: usize) -> Result<bool> {
    if d == 0 {
        return Ok(true);
    }
    let mut rows: Vec<Vec<f64>> = a.to_vec();
    let mut rhs: Vec<f64> = vec![0.0; a.len()];
    let (box_a, box_b) = box_rows(&vec![-1.0; d], &vec![1.0; d]);
    rows.extend(box_a);
    rhs.extend(box_b);
    let verts = polytope_vertices(&rows, &rhs, d)?;
    for v in verts {
        if v.iter().any(|c| c.abs() > 1e-7) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Euclidean projection onto {x : Ax <= b} by active-set enumeration.
/// Exact (up to linear solves) for low dimension and few rows.
pub fn project_to_polytope(t: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let d = t.len();
    if d == 0 {
        return Ok(vec![]);
    }
    // fast path: already feasible
    if a.iter().zip(b).all(|(row, bi)| dot_slice(row, t) <= bi + 1e-12) {
        return Ok(t.to_vec());
    }
    let m = a.len();
    // Two feasibility tiers. The KKT argument below (lam >= 0 and feasible
    // => global projection) only holds for candidates that really are
    // feasible, so candidates at solver noise (1e-12, like the fast path)
    // decide the result; looser ones (1e-8) are kept only as a fallback for
    // near-degenerate active sets, else a candidate violating one skipped
    // constraint by a hair can beat the true projection on distance.
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut loose: Option<(f64, Vec<f64>)> = None;
    for k in 1..=d.min(m) {
        combinations(m, k, |rows| {
            // KKT: y = t - A_W^T lam, A_W y = b_W
            // => (A_W A_W^T) lam = A_W t - b_W, lam >= 0
            let aw = DMatrix::from_fn(k, d, |r, c| a[rows[r]][c]);
            let gram = &aw * aw.transpose();
            let rhs = DVector::from_fn(k, |r, _| dot_slice(&a[rows[r]], t) - b[rows[r]]);
            let Some(lam) = gram.clone().lu().solve(&rhs) else {
                return;
            };
            let res = (&gram * &lam - &rhs).amax();
            if !res.is_finite() || res > 1e-8 {
                return;
            }
            if lam.iter().any(|&l| l < -1e-9) {
                return;
            }
            let correction = aw.transpose() * &lam;
            let y: Vec<f64> = (0..d).map(|i| t[i] - correction[i]).collect();
            let violation = a
                .iter()
                .zip(b)
                .map(|(row, bi)| dot_slice(row, &y) - bi)
                .fold(0.0f64, f64::max);
            if violation > 1e-8 {
                return;
            }
            let dist = dist_slice(&y, t);
            let slot = if violation <= 1e-12 { &mut best } else { &mut loose };
            match slot {
                None => *slot = Some((dist, y)),
                Some((bd, _)) if dist < *bd - 1e-15 => *slot = Some((dist, y)),
                _ => {}
            }
        });
        if best.is_some() {
            // an active set of size k already satisfies KKT; by convexity it
            // is the global projection
            break;
        }
    }
    best.or(loose).map(|(_, y)| y).ok_or(SpaceError::EmptyFeasible)
}

/// Closest feasible point(s) to the carrier projection of `x`: project onto
/// the carrier, then clamp into the shape. Convex shapes give a singleton;
/// output is deduplicated (1e-9) and lexicographically ordered.
pub fn feasible_projection(x: &Vector, f: &FeasibleSet) -> Result<Vec<Vector>> {
    if x.dim() != f.ambient_dim() {
        return Err(SpaceError::DimensionMismatch {
            expected: f.ambient_dim(),
            got: x.dim(),
        });
    }
    let t = f.carrier.coords(x);
    let y = f.closest_in_shape(&t)?;
    Ok(dedup_points(vec![f.carrier.embed(&y)], FEAS_TOL))
}
