//! Exact Gröbner machinery for submodules of free modules over the rational
//! polynomial ring: module monomial orders (position-over-term and
//! term-over-position, on grevlex or lex), normal-form reduction, Buchberger
//! completion with the same-position pair criterion, and syzygy-based
//! kernel generators for restrict-then-sign constraint systems.
//!
//! The kernel computation turns each boundary condition "the signed
//! combination of components vanishes on a subspace V" into membership in
//! the ideal generated by V's normal linear forms, and reads the solution
//! module off an elimination-order Gröbner basis of the graph module: each
//! basis element whose constraint part vanished is a syzygy, and its
//! tracking part is a kernel generator.

use crate::poly::{Monomial, MonomialOrder, QPoly};
use crate::qlin::{self, QMat, QScalar, QVec};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroebnerError {
    #[error("zero element has no leading term")]
    ZeroElement,
    #[error("module shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("resource cap exceeded: {reason} (partial basis of {} elements kept)", partial.len())]
    CapExceeded {
        reason: String,
        partial: Vec<ModuleElement>,
    },
}

type Result<T> = std::result::Result<T, GroebnerError>;

/// Desk-scale input caps; growth caps below guard the computation itself.
pub const MAX_POSITIONS: usize = 6;
pub const MAX_VARS: usize = 3;
pub const MAX_INPUT_DEGREE: usize = 4;

const MAX_BASIS: usize = 1024;
const MAX_WORK_DEGREE: usize = 60;
const MAX_INTERNAL_POSITIONS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionRule {
    /// Position dominates: components are compared first, lower index
    /// greater, the base order breaking ties within a component.
    Pot,
    /// Term dominates: the base order compares monomials first, lower
    /// position breaking ties. Degree-compatible when the base order is.
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleOrder {
    pub base: MonomialOrder,
    pub rule: PositionRule,
}

impl ModuleOrder {
    pub const POT_GREVLEX: ModuleOrder = ModuleOrder {
        base: MonomialOrder::Grevlex,
        rule: PositionRule::Pot,
    };
    pub const TOP_GREVLEX: ModuleOrder = ModuleOrder {
        base: MonomialOrder::Grevlex,
        rule: PositionRule::Top,
    };

    /// Total order on (position, monomial) pairs; `Greater` means "leads".
    pub fn cmp(&self, a: (usize, &Monomial), b: (usize, &Monomial)) -> Ordering {
        match self.rule {
            PositionRule::Pot => match a.0.cmp(&b.0) {
                Ordering::Equal => self.base.cmp(a.1, b.1),
                // lower position is greater
                other => other.reverse(),
            },
            PositionRule::Top => match self.base.cmp(a.1, b.1) {
                Ordering::Equal => a.0.cmp(&b.0).reverse(),
                other => other,
            },
        }
    }
}

/// An element of the free module P^λ over the rational polynomial ring.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleElement {
    components: Vec<QPoly>,
}

impl ModuleElement {
    pub fn new(components: Vec<QPoly>) -> Result<Self> {
        if components.is_empty() {
            return Err(GroebnerError::ShapeMismatch("no components".into()));
        }
        let nv = components[0].nvars();
        if components.iter().any(|c| c.nvars() != nv) {
            return Err(GroebnerError::ShapeMismatch(
                "inconsistent variable counts across components".into(),
            ));
        }
        Ok(ModuleElement { components })
    }

    pub fn zero(lambda: usize, nvars: usize) -> Self {
        ModuleElement {
            components: vec![QPoly::zero(nvars); lambda],
        }
    }

    /// Basis element `poly · e_pos`.
    pub fn unit(lambda: usize, pos: usize, poly: QPoly) -> Self {
        let mut components = vec![QPoly::zero(poly.nvars()); lambda];
        components[pos] = poly;
        ModuleElement { components }
    }

    pub fn components(&self) -> &[QPoly] {
        &self.components
    }

    pub fn lambda(&self) -> usize {
        self.components.len()
    }

    pub fn nvars(&self) -> usize {
        self.components[0].nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.components.iter().filter_map(|c| c.degree()).max()
    }

    pub fn add(&self, other: &Self) -> Self {
        ModuleElement {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        ModuleElement {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &QScalar) -> Self {
        ModuleElement {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// `self − c · x^m · other`.
    pub fn sub_scaled(&self, other: &Self, m: &Monomial, c: &QScalar) -> Self {
        ModuleElement {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(&b.mul_term(m, c)))
                .collect(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Monomial, &QScalar)> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(pos, p)| p.terms().map(move |(m, c)| (pos, m, c)))
    }

    pub fn leading_term(&self, ord: &ModuleOrder) -> Result<(usize, Monomial, QScalar)> {
        let mut best: Option<(usize, &Monomial, &QScalar)> = None;
        for (pos, m, c) in self.terms() {
            let better = match &best {
                None => true,
                Some((bp, bm, _)) => ord.cmp((pos, m), (*bp, bm)) == Ordering::Greater,
            };
            if better {
                best = Some((pos, m, c));
            }
        }
        best.map(|(p, m, c)| (p, m.clone(), c.clone()))
            .ok_or(GroebnerError::ZeroElement)
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self, ord: &ModuleOrder) -> Result<Self> {
        let (_, _, c) = self.leading_term(ord)?;
        Ok(self.scale(&(qlin::qone() / c)))
    }
}

impl fmt::Display for ModuleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Full normal form of `e` against `basis`: no term of the result is
/// divisible by a leading term of `basis` at the same position.
pub fn reduce(e: &ModuleElement, basis: &[ModuleElement], ord: &ModuleOrder) -> ModuleElement {
    let leads: Vec<(usize, Monomial, QScalar)> = basis
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| g.leading_term(ord).expect("nonzero"))
        .collect();
    let nonzero: Vec<&ModuleElement> = basis.iter().filter(|g| !g.is_zero()).collect();
    let mut tail = ModuleElement::zero(e.lambda(), e.nvars());
    let mut work = e.clone();
    while !work.is_zero() {
        let (pos, mon, coeff) = work.leading_term(ord).expect("nonzero");
        let hit = leads
            .iter()
            .position(|(gp, gm, _)| *gp == pos && gm.divides(&mon));
        match hit {
            Some(i) => {
                let (_, gm, gc) = &leads[i];
                let q = gm.div_into(&mon);
                work = work.sub_scaled(nonzero[i], &q, &(coeff / gc));
            }
            None => {
                // confirmed irreducible: move the term to the tail
                tail.components[pos].add_term(mon.clone(), coeff.clone());
                work.components[pos].add_term(mon, -coeff);
            }
        }
    }
    tail
}

/// S-vector of two elements with the same leading position; `None` when the
/// leading positions differ (such pairs reduce to zero trivially and are
/// skipped, the module form of the first Buchberger criterion).
pub fn s_vector(
    f: &ModuleElement,
    g: &ModuleElement,
    ord: &ModuleOrder,
) -> Result<Option<ModuleElement>> {
    let (fp, fm, fc) = f.leading_term(ord)?;
    let (gp, gm, gc) = g.leading_term(ord)?;
    if fp != gp {
        return Ok(None);
    }
    let l = fm.lcm(&gm);
    let left = scale_by_term(f, &fm.div_into(&l), &(qlin::qone() / fc));
    let right = scale_by_term(g, &gm.div_into(&l), &(qlin::qone() / gc));
    Ok(Some(left.sub(&right)))
}

fn scale_by_term(e: &ModuleElement, m: &Monomial, c: &QScalar) -> ModuleElement {
    ModuleElement {
        components: e.components.iter().map(|p| p.mul_term(m, c)).collect(),
    }
}

fn check_input_caps(gens: &[ModuleElement]) -> Result<()> {
    if let Some(g) = gens.first() {
        if g.lambda() > MAX_POSITIONS {
            return Err(GroebnerError::CapExceeded {
                reason: format!("{} positions exceeds the cap of {MAX_POSITIONS}", g.lambda()),
                partial: vec![],
            });
        }
        if g.nvars() > MAX_VARS {
            return Err(GroebnerError::CapExceeded {
                reason: format!("{} variables exceeds the cap of {MAX_VARS}", g.nvars()),
                partial: vec![],
            });
        }
    }
    if let Some(d) = gens.iter().filter_map(|g| g.degree()).max() {
        if d > MAX_INPUT_DEGREE {
            return Err(GroebnerError::CapExceeded {
                reason: format!("input degree {d} exceeds the cap of {MAX_INPUT_DEGREE}"),
                partial: vec![],
            });
        }
    }
    Ok(())
}

/// Buchberger completion under the desk-scale input caps.
pub fn buchberger(generators: &[ModuleElement], ord: &ModuleOrder) -> Result<Vec<ModuleElement>> {
    check_input_caps(generators)?;
    buchberger_unchecked(generators, ord)
}

/// Completion without the input caps (used internally on the extended
/// elimination systems, whose position count exceeds the user-facing cap).
/// Growth caps still apply.
fn buchberger_unchecked(
    generators: &[ModuleElement],
    ord: &ModuleOrder,
) -> Result<Vec<ModuleElement>> {
    let mut basis: Vec<ModuleElement> = Vec::new();
    for g in generators {
        if !g.is_zero() {
            basis.push(g.monic(ord)?);
        }
    }
    if basis.is_empty() {
        return Ok(vec![]);
    }
    if basis[0].lambda() > MAX_INTERNAL_POSITIONS {
        return Err(GroebnerError::CapExceeded {
            reason: "internal position count too large".into(),
            partial: vec![],
        });
    }
    // pending S-pairs, selected by lowest lcm total degree (normal strategy)
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let push_pairs = |pairs: &mut Vec<(usize, usize)>, _basis: &[ModuleElement], j: usize| {
        for i in 0..j {
            pairs.push((i, j));
        }
    };
    for j in 0..basis.len() {
        push_pairs(&mut pairs, &basis, j);
    }
    let lcm_degree = |basis: &[ModuleElement], i: usize, j: usize| -> Option<usize> {
        let (pi, mi, _) = basis[i].leading_term(ord).ok()?;
        let (pj, mj, _) = basis[j].leading_term(ord).ok()?;
        (pi == pj).then(|| mi.lcm(&mj).total_degree())
    };
    while !pairs.is_empty() {
        // pick the pair with the lowest lcm degree; same-position pairs only
        let mut best: Option<(usize, usize)> = None; // (deg, idx)
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            if let Some(d) = lcm_degree(&basis, i, j) {
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, idx));
                }
            }
        }
        let Some((_, idx)) = best else {
            break; // only cross-position pairs remain
        };
        let (i, j) = pairs.swap_remove(idx);
        let s = s_vector(&basis[i], &basis[j], ord)?.expect("same leading position");
        let r = reduce(&s, &basis, ord);
        if r.is_zero() {
            continue;
        }
        if let Some(d) = r.degree() {
            if d > MAX_WORK_DEGREE {
                return Err(GroebnerError::CapExceeded {
                    reason: format!("working degree {d} exceeds {MAX_WORK_DEGREE}"),
                    partial: basis,
                });
            }
        }
        basis.push(r.monic(ord)?);
        if basis.len() > MAX_BASIS {
            return Err(GroebnerError::CapExceeded {
                reason: format!("basis size exceeds {MAX_BASIS}"),
                partial: basis,
            });
        }
        let j = basis.len() - 1;
        push_pairs(&mut pairs, &basis, j);
        // drop pairs made redundant is skipped: desk scale favours clarity
    }
    Ok(interreduce(basis, ord))
}

/// Reduce every element against the others until stable; drop zeros; monic;
/// sort descending by leading term for determinism.
fn interreduce(mut basis: Vec<ModuleElement>, ord: &ModuleOrder) -> Vec<ModuleElement> {
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < basis.len() {
            let e = basis.remove(i);
            let r = reduce(&e, &basis, ord);
            if r.is_zero() {
                changed = true;
                continue; // dropped; indices shift
            }
            let r = r.monic(ord).expect("nonzero");
            if r != e {
                changed = true;
            }
            basis.insert(i, r);
            i += 1;
        }
        if !changed {
            break;
        }
    }
    basis.sort_by(|a, b| {
        let (pa, ma, _) = a.leading_term(ord).expect("nonzero");
        let (pb, mb, _) = b.leading_term(ord).expect("nonzero");
        ord.cmp((pb, &mb), (pa, &ma)) // descending
    });
    basis
}

/// One restrict-then-sign constraint row: the signed combination of the
/// listed components must vanish on the boundary subspace, given by an
/// orthogonal basis and the normals spanning its orthogonal complement
/// (the linear forms generating the subspace's vanishing ideal).
#[derive(Debug, Clone)]
pub struct TRow {
    pub entries: Vec<(usize, i64)>,
    pub boundary_basis: Vec<QVec>,
    pub boundary_normals: Vec<QVec>,
}

fn linear_form(nvars: usize, w: &QVec) -> QPoly {
    let mut p = QPoly::zero(nvars);
    for (i, c) in w.iter().enumerate() {
        p.add_term(Monomial::var(nvars, i), c.clone());
    }
    p
}

/// The signed combinations of `f`'s components restricted to each row's
/// boundary carrier (coordinates of the boundary basis). All zero iff `f`
/// is in the kernel.
pub fn apply_t(rows: &[TRow], f: &ModuleElement) -> Vec<QPoly> {
    rows.iter()
        .map(|row| {
            let mut d = QPoly::zero(f.nvars());
            for (pos, sign) in &row.entries {
                let signed = f.components()[*pos].scale(&qlin::qfrom_i64(*sign));
                d = d.add(&signed);
            }
            d.restrict_to_span(&row.boundary_basis)
        })
        .collect()
}

/// Finite generating set of `{f in P^λ : T f = 0}` under restrict-then-sign
/// semantics, via syzygies of the extended system: one column per class
/// carrying its signs down the rows, plus one column per (row, normal) pair
/// carrying that normal's linear form, so that a syzygy's class part is
/// exactly a kernel element. The syzygies are read off an elimination
/// (position-over-term) Gröbner basis of the graph module; the returned
/// generators are normalized under `ord`.
pub fn kernel_generators(
    lambda: usize,
    nvars: usize,
    rows: &[TRow],
    ord: &ModuleOrder,
) -> Result<Vec<ModuleElement>> {
    if lambda == 0 || lambda > MAX_POSITIONS {
        return Err(GroebnerError::CapExceeded {
            reason: format!("lambda {lambda} outside 1..={MAX_POSITIONS}"),
            partial: vec![],
        });
    }
    if nvars > MAX_VARS {
        return Err(GroebnerError::CapExceeded {
            reason: format!("{nvars} variables exceeds the cap of {MAX_VARS}"),
            partial: vec![],
        });
    }
    let tau = rows.len();
    if tau == 0 {
        // no constraints: the whole module, generated by the unit vectors
        return (0..lambda)
            .map(|k| {
                ModuleElement::new({
                    let mut c = vec![QPoly::zero(nvars); lambda];
                    c[k] = QPoly::constant(nvars, qlin::qone());
                    c
                })
            })
            .collect();
    }
    // columns of the constraint map
    let mut columns: Vec<Vec<QPoly>> = Vec::new(); // each of length tau
    for k in 0..lambda {
        let mut col = vec![QPoly::zero(nvars); tau];
        for (t, row) in rows.iter().enumerate() {
            for (pos, sign) in &row.entries {
                if *pos == k {
                    col[t] = col[t].add(&QPoly::constant(nvars, qlin::qfrom_i64(*sign)));
                }
            }
        }
        columns.push(col);
    }
    for (t, row) in rows.iter().enumerate() {
        for w in &row.boundary_normals {
            let mut col = vec![QPoly::zero(nvars); tau];
            col[t] = linear_form(nvars, w).neg();
            columns.push(col);
        }
    }
    let s = columns.len();
    // graph module elements (column, e_i) in P^{tau + s}
    let extended: Vec<ModuleElement> = columns
        .iter()
        .enumerate()
        .map(|(i, col)| {
            let mut comps = col.clone();
            comps.extend(vec![QPoly::zero(nvars); s]);
            comps[tau + i] = QPoly::constant(nvars, qlin::qone());
            ModuleElement::new(comps).expect("consistent shape")
        })
        .collect();
    let elim = ModuleOrder {
        base: ord.base,
        rule: PositionRule::Pot,
    };
    let gb = buchberger_unchecked(&extended, &elim)?;
    let mut gens: Vec<ModuleElement> = Vec::new();
    for g in &gb {
        if g.components()[..tau].iter().all(|c| c.is_zero()) {
            let class_part: Vec<QPoly> = g.components()[tau..tau + lambda].to_vec();
            let e = ModuleElement::new(class_part)?;
            if !e.is_zero() {
                gens.push(e.monic(ord)?);
            }
        }
    }
    gens = interreduce(gens, ord);
    // symbolic verification: every generator is annihilated by T
    for g in &gens {
        debug_assert!(
            apply_t(rows, g).iter().all(|p| p.is_zero()),
            "kernel generator fails T f = 0: {g}"
        );
    }
    Ok(gens)
}

/// Coefficient vectors (positions-major, monomials in the `monomials_up_to`
/// order) spanning the degree-≤ r slice of the module generated by `gens`.
/// The generators are first completed to a Gröbner basis under the
/// degree-compatible term-over-position grevlex order, which guarantees
/// every module element of degree ≤ r is a combination of products
/// `x^m · g` of degree ≤ r.
pub fn degree_slice_span(
    gens: &[ModuleElement],
    lambda: usize,
    nvars: usize,
    r: usize,
) -> Result<Vec<QVec>> {
    if gens.is_empty() {
        return Ok(vec![]);
    }
    let gb = buchberger_unchecked(gens, &ModuleOrder::TOP_GREVLEX)?;
    let monos = crate::poly::monomials_up_to(nvars, r);
    let index_of = |m: &Monomial| monos.iter().position(|x| x == m).expect("degree bound");
    let width = lambda * monos.len();
    let mut rows: Vec<QVec> = Vec::new();
    for g in &gb {
        let gd = g.degree().unwrap_or(0);
        if gd > r {
            continue;
        }
        for m in crate::poly::monomials_up_to(nvars, r - gd) {
            let shifted = scale_by_term(g, &m, &qlin::qone());
            let mut row = vec![qlin::qzero(); width];
            for (pos, mono, c) in shifted.terms() {
                row[pos * monos.len() + index_of(mono)] = c.clone();
            }
            rows.push(row);
        }
    }
    Ok(QMat::from_rows(rows).row_basis())
}

/// Certificate for a completed basis: every same-position S-vector reduces
/// to zero. Used by the test suites.
pub fn buchberger_certificate(basis: &[ModuleElement], ord: &ModuleOrder) -> bool {
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            match s_vector(&basis[i], &basis[j], ord) {
                Ok(Some(s)) => {
                    if !reduce(&s, basis, ord).is_zero() {
                        return false;
                    }
                }
                Ok(None) => {}
                Err(_) => return false,
            }
        }
    }
    true
}
