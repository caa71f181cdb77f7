//! Exact linear algebra over arbitrary-precision rationals.
//!
//! Small dense routines backing the exact lanes of the arrangement,
//! surrogate and groebner modules: reduced row echelon form, nullspaces,
//! particular solutions, Gram-Schmidt orthogonalization (without
//! normalization, so entries stay rational) and span intersections.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QScalar = BigRational;
pub type QVec = Vec<QScalar>;

/// Dense row-major rational matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<QVec>,
}

pub fn qzero() -> QScalar {
    QScalar::zero()
}

pub fn qone() -> QScalar {
    QScalar::one()
}

pub fn qfrom_i64(n: i64) -> QScalar {
    QScalar::from_integer(BigInt::from(n))
}

/// Exact conversion: every finite f64 is a dyadic rational.
pub fn qfrom_f64(x: f64) -> QScalar {
    QScalar::from_float(x).expect("finite float required")
}

pub fn qto_f64(q: &QScalar) -> f64 {
    let num = q.numer();
    let den = q.denom();
    // Avoid precision loss for big numerators: go through a string only when
    // the parts exceed i128 range (desk-scale inputs rarely do).
    match (i128::try_from(num), i128::try_from(den)) {
        (Ok(n), Ok(d)) => n as f64 / d as f64,
        _ => {
            let digits = 30usize;
            let scale = BigInt::from(10u32).pow(digits as u32);
            let scaled = (num * &scale) / den;
            let s = scaled.to_string();
            let v: f64 = s.parse().unwrap_or(0.0);
            v / 1e30
        }
    }
}

pub fn dot(a: &[QScalar], b: &[QScalar]) -> QScalar {
    assert_eq!(a.len(), b.len());
    let mut acc = qzero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x * y;
    }
    acc
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![vec![qzero(); cols]; rows],
        }
    }

    pub fn from_rows(data: Vec<QVec>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        for r in &data {
            assert_eq!(r.len(), cols, "ragged matrix");
        }
        QMat { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = qone();
        }
        m
    }

    /// In-place reduced row echelon form; returns pivot column indices.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            // largest-magnitude pivot keeps intermediate numerators smaller
            let mut best: Option<usize> = None;
            for r in row..self.rows {
                if !self.data[r][col].is_zero() {
                    match best {
                        None => best = Some(r),
                        Some(b) => {
                            if self.data[r][col].abs() > self.data[b][col].abs() {
                                best = Some(r);
                            }
                        }
                    }
                }
            }
            let Some(p) = best else { continue };
            self.data.swap(row, p);
            let inv = self.data[row][col].recip();
            for c in col..self.cols {
                let v = &self.data[row][c] * &inv;
                self.data[row][c] = v;
            }
            for r in 0..self.rows {
                if r != row && !self.data[r][col].is_zero() {
                    let f = self.data[r][col].clone();
                    for c in col..self.cols {
                        let sub = &self.data[row][c] * &f;
                        self.data[r][c] = &self.data[r][c] - sub;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Exact determinant of a square matrix (elimination with row swaps).
    pub fn det(&self) -> QScalar {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let mut m = self.data.clone();
        let n = self.rows;
        let mut det = qone();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return qzero();
            };
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            let lead = m[col][col].clone();
            det *= lead.clone();
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &lead;
                for c in col..n {
                    let delta = &factor * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
        det
    }

    /// Reduced-echelon-normal-form basis of the right nullspace.
    /// Deterministic: one basis vector per free column, entry 1 there.
    pub fn nullspace(&self) -> Vec<QVec> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![qzero(); self.cols];
            v[free] = qone();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.data[r][free].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// One exact solution of self * x = b, or None when inconsistent.
    pub fn solve(&self, b: &[QScalar]) -> Option<QVec> {
        assert_eq!(b.len(), self.rows);
        let mut aug = QMat::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            aug.data[r][..self.cols].clone_from_slice(&self.data[r]);
            aug.data[r][self.cols] = b[r].clone();
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the rhs column
        }
        let mut x = vec![qzero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.data[r][self.cols].clone();
        }
        Some(x)
    }

    /// Row space in reduced echelon form, zero rows dropped.
    pub fn row_basis(&self) -> Vec<QVec> {
        let mut m = self.clone();
        let pivots = m.rref();
        m.data.truncate(pivots.len());
        m.data
    }
}

/// Gram-Schmidt without normalization: output vectors are pairwise
/// orthogonal, rational, and span the same space. Near-dependent inputs
/// (exactly dependent, in rational arithmetic) are dropped.
pub fn orthogonalize(vectors: &[QVec]) -> Vec<QVec> {
    let mut out: Vec<QVec> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &out {
            let c = dot(&w, b) / dot(b, b);
            for (wi, bi) in w.iter_mut().zip(b.iter()) {
                *wi -= &c * bi;
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            out.push(w);
        }
    }
    out
}

/// Basis of the orthogonal complement of span(vectors) in ambient dim n.
pub fn complement(vectors: &[QVec], n: usize) -> Vec<QVec> {
    if vectors.is_empty() {
        return QMat::identity(n).data;
    }
    QMat::from_rows(vectors.to_vec()).nullspace()
}

/// Intersection of two spans, as a reduced-echelon basis.
/// x is in both spans iff it is orthogonal to both complements.
pub fn intersect_spans(a: &[QVec], b: &[QVec], n: usize) -> Vec<QVec> {
    let mut rows = complement(a, n);
    rows.extend(complement(b, n));
    if rows.is_empty() {
        return QMat::identity(n).data;
    }
    QMat::from_rows(rows).nullspace()
}

/// Span equality via identical reduced row echelon forms.
pub fn same_span(a: &[QVec], b: &[QVec], n: usize) -> bool {
    let ra = if a.is_empty() {
        Vec::new()
    } else {
        QMat::from_rows(a.to_vec()).row_basis()
    };
    let rb = if b.is_empty() {
        Vec::new()
    } else {
        QMat::from_rows(b.to_vec()).row_basis()
    };
    let _ = n;
    ra == rb
}

/// True when span(inner) is contained in span(outer).
pub fn span_contained(inner: &[QVec], outer: &[QVec], n: usize) -> bool {
    if inner.is_empty() {
        return true;
    }
    let comp = complement(outer, n);
    inner
        .iter()
        .all(|v| comp.iter().all(|c| dot(v, c).is_zero()))
}
