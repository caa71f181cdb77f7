//! Partition of the ambient space induced by a family of subspaces through
//! the origin: the intersection lattice gives one class per distinct
//! carrier — pure classes for the input subspaces, intersection classes for
//! the proper meets, and a complement class for everything off the union —
//! plus the boundary incidence operator whose rows pair each class with the
//! classes immediately below it.
//!
//! The lattice is computed in exact rational arithmetic on the rationalized
//! input bases, so class identity and containment never depend on a float
//! tolerance; the float `Subspace` views exist for geometric queries.

use crate::qlin::{self, QVec};
use crate::space::{SpaceError, Subspace, Vector};
use rand::{Rng, SeedableRng};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArrangementError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("need between 1 and 12 subspaces, got {0}")]
    FamilySize(usize),
    #[error("intersection lattice exceeded {0} elements")]
    LatticeCap(usize),
}

type Result<T> = std::result::Result<T, ArrangementError>;

const LATTICE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Pure,
    Intersection,
    Complement,
}

/// One class of the partition. `label` is the set of input indices whose
/// subspaces contain this class's carrier (empty for the complement); the
/// class as a point set is the carrier minus every smaller carrier, which
/// [`Partition::class_of`] realizes by letting the smallest carrier win.
#[derive(Debug, Clone)]
pub struct PartitionClass {
    pub label: BTreeSet<usize>,
    pub kind: ClassKind,
    pub carrier: Subspace,
    exact_basis: Vec<QVec>,
}

impl PartitionClass {
    pub fn exact_basis(&self) -> &[QVec] {
        &self.exact_basis
    }

    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub ambient: usize,
    pub classes: Vec<PartitionClass>,
    /// (dropped input index, kept input index) for collapsed duplicates.
    pub duplicate_inputs: Vec<(usize, usize)>,
}

fn rationalize(s: &Subspace) -> Vec<QVec> {
    let raw: Vec<QVec> = s
        .basis()
        .iter()
        .map(|v| v.0.iter().map(|&x| qlin::qfrom_f64(x)).collect())
        .collect();
    qlin::orthogonalize(&raw)
}

fn float_view(exact: &[QVec], n: usize) -> Result<Subspace> {
    if exact.is_empty() {
        return Ok(Subspace::origin(n));
    }
    let spanning: Vec<Vector> = exact
        .iter()
        .map(|v| Vector(v.iter().map(qlin::qto_f64).collect()))
        .collect();
    Ok(Subspace::new(n, &spanning)?)
}

/// Build the partition induced by the family. Duplicate inputs collapse to
/// their first occurrence; the collapsed pairs are recorded on the result.
pub fn build_partition(subspaces: &[Subspace]) -> Result<Partition> {
    if subspaces.is_empty() || subspaces.len() > 12 {
        return Err(ArrangementError::FamilySize(subspaces.len()));
    }
    let n = subspaces[0].ambient_dim();
    if let Some(s) = subspaces.iter().find(|s| s.ambient_dim() != n) {
        return Err(ArrangementError::Space(SpaceError::DimensionMismatch {
            expected: n,
            got: s.ambient_dim(),
        }));
    }
    // deduplicate inputs, remembering which indices collapsed
    let mut inputs: Vec<(usize, Vec<QVec>)> = Vec::new();
    let mut duplicate_inputs = Vec::new();
    for (i, s) in subspaces.iter().enumerate() {
        let e = rationalize(s);
        match inputs.iter().find(|(_, b)| qlin::same_span(b, &e, n)) {
            Some((kept, _)) => duplicate_inputs.push((i, *kept)),
            None => inputs.push((i, e)),
        }
    }
    // closure under pairwise intersection, exact
    let mut elements: Vec<Vec<QVec>> = inputs.iter().map(|(_, b)| b.clone()).collect();
    let mut frontier: Vec<usize> = (0..elements.len()).collect();
    while !frontier.is_empty() {
        let mut fresh = Vec::new();
        for &i in &frontier {
            for j in 0..elements.len() {
                if i == j {
                    continue;
                }
                let meet = qlin::orthogonalize(&qlin::intersect_spans(
                    &elements[i],
                    &elements[j],
                    n,
                ));
                if !elements.iter().any(|e| qlin::same_span(e, &meet, n)) {
                    elements.push(meet);
                    fresh.push(elements.len() - 1);
                    if elements.len() > LATTICE_CAP {
                        return Err(ArrangementError::LatticeCap(LATTICE_CAP));
                    }
                }
            }
        }
        frontier = fresh;
    }
    // label each element by the inputs containing it
    let mut classes: Vec<PartitionClass> = Vec::new();
    for e in &elements {
        let label: BTreeSet<usize> = inputs
            .iter()
            .filter(|(_, b)| qlin::span_contained(e, b, n))
            .map(|(idx, _)| *idx)
            .collect();
        let kind = if label.len() == 1 {
            ClassKind::Pure
        } else {
            ClassKind::Intersection
        };
        classes.push(PartitionClass {
            label,
            kind,
            carrier: float_view(e, n)?,
            exact_basis: e.clone(),
        });
    }
    // complement class, unless a carrier already covers the whole space
    if !elements.iter().any(|e| e.len() == n) {
        classes.push(PartitionClass {
            label: BTreeSet::new(),
            kind: ClassKind::Complement,
            carrier: Subspace::full(n),
            exact_basis: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { qlin::qone() } else { qlin::qzero() })
                        .collect()
                })
                .collect(),
        });
    }
    // deterministic order: pure, then intersections by (size, label), then
    // the complement
    classes.sort_by(|a, b| {
        let rank = |c: &PartitionClass| match c.kind {
            ClassKind::Pure => 0,
            ClassKind::Intersection => 1,
            ClassKind::Complement => 2,
        };
        rank(a)
            .cmp(&rank(b))
            .then(a.label.len().cmp(&b.label.len()))
            .then(a.label.cmp(&b.label))
    });
    Ok(Partition {
        ambient: n,
        classes,
        duplicate_inputs,
    })
}

impl Partition {
    pub fn lambda(&self) -> usize {
        self.classes.len()
    }

    pub fn complement_index(&self) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| c.kind == ClassKind::Complement)
    }

    /// Index of the unique class containing `x`: among all carriers that
    /// contain `x` (within `tol`), the smallest-dimensional one wins, which
    /// is exactly the case order of the piecewise definition.
    pub fn class_of(&self, x: &Vector, tol: f64) -> usize {
        let mut best: Option<(usize, usize)> = None; // (dim, index)
        for (i, c) in self.classes.iter().enumerate() {
            if c.carrier.contains(x, tol) {
                let key = (c.carrier.dim(), i);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
        }
        best.expect("complement or a full-space class contains every point").1
    }

    /// A point lying in the class proper (on the carrier, off every smaller
    /// carrier). Deterministic.
    pub fn representative(&self, idx: usize) -> Vector {
        let c = &self.classes[idx];
        let d = c.carrier.dim();
        if d == 0 {
            return Vector::zeros(self.ambient);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7 + idx as u64);
        for _ in 0..1000 {
            let t: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let x = c.carrier.embed(&t);
            if self.class_of(&x, 1e-9) == idx {
                return x;
            }
        }
        c.carrier.embed(&vec![1.0; d])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "ambient": self.ambient,
            "lambda": self.lambda(),
            "classes": self.classes.iter().map(|c| serde_json::json!({
                "label": c.label.iter().collect::<Vec<_>>(),
                "kind": c.kind,
                "dim": c.carrier.dim(),
                "basis": c.carrier.basis().iter().map(|v| v.0.clone()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// One boundary adjacency: the carrier of `lo` is immediately contained in
/// the carrier of `hi`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct IncidenceRow {
    pub hi: usize,
    pub lo: usize,
}

#[derive(Debug, Clone)]
pub struct IncidenceMatrix {
    pub rows: Vec<IncidenceRow>,
    pub lambda: usize,
}

impl IncidenceMatrix {
    pub fn tau(&self) -> usize {
        self.rows.len()
    }

    /// Dense τ×λ matrix: +1 on the higher class, −1 on the lower.
    pub fn dense(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![0i64; self.lambda];
                row[r.hi] = 1;
                row[r.lo] = -1;
                row
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.dense() {
            let line: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, partition: &Partition) -> serde_json::Value {
        serde_json::json!({
            "tau": self.tau(),
            "lambda": self.lambda,
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "hi": r.hi,
                "lo": r.lo,
                "hi_label": partition.classes[r.hi].label.iter().collect::<Vec<_>>(),
                "lo_label": partition.classes[r.lo].label.iter().collect::<Vec<_>>(),
                "boundary_dim": partition.classes[r.lo].carrier.dim(),
            })).collect::<Vec<_>>(),
            "dense": self.dense(),
        })
    }
}

/// Rows pair classes under immediate carrier containment: lo ⊊ hi with no
/// class strictly between. Containment is decided exactly on the rational
/// carriers. The boundary carrier of a row is the lower class's carrier.
pub fn build_incidence(partition: &Partition) -> IncidenceMatrix {
    let n = partition.ambient;
    let classes = &partition.classes;
    let strictly_below = |a: usize, b: usize| -> bool {
        classes[a].dim() < classes[b].dim()
            && qlin::span_contained(classes[a].exact_basis(), classes[b].exact_basis(), n)
    };
    let mut rows = Vec::new();
    for hi in 0..classes.len() {
        for lo in 0..classes.len() {
            if !strictly_below(lo, hi) {
                continue;
            }
            let immediate = !(0..classes.len())
                .any(|mid| strictly_below(lo, mid) && strictly_below(mid, hi));
            if immediate {
                rows.push(IncidenceRow { hi, lo });
            }
        }
    }
    IncidenceMatrix {
        rows,
        lambda: classes.len(),
    }
}
