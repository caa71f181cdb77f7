//! Recombining local argmaxima into a global candidate: each solved problem
//! pins the projection of the unknown point onto its carrier, so the glued
//! point is the intersection of the affine sets `solution + carrier^perp`.
//! For a strictly concave utility that separates across orthogonal carriers
//! spanning the space, that intersection point *is* the global argmax; the
//! certificate returned by [`certify_glue`] records exactly which of those
//! hypotheses were verified.

use crate::poly::QPoly;
use crate::problems::{LocalProblem, ProblemError};
use crate::solver::is_strictly_concave;
use crate::space::{AffineSet, Subspace, Vector};
use serde::Serialize;

type Result<T> = std::result::Result<T, ProblemError>;

pub const GLUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GlueStatus {
    /// Exactly as many independent equations as unknowns; unique point.
    ExactPoint,
    /// More equations than unknowns but consistent; unique point.
    OverdeterminedConsistent,
    /// The projection constraints contradict each other; `point` is the
    /// least-squares witness and `residual` its constraint violation.
    Inconsistent,
    /// The constraints leave degrees of freedom; `affine` carries the whole
    /// solution set through `point`.
    Underdetermined,
}

#[derive(Debug, Clone)]
pub struct GlueResult {
    pub status: GlueStatus,
    /// Glued point (or least-squares witness when inconsistent).
    pub point: Vector,
    /// Worst absolute violation of any single projection equation.
    pub residual: f64,
    pub rank: usize,
    pub equations: usize,
    /// Solution set when underdetermined.
    pub affine: Option<AffineSet>,
    /// Per-problem distance from the glued point's carrier projection to
    /// that problem's pinned solution.
    pub quality: Vec<f64>,
}

fn singleton_solution(p: &LocalProblem) -> Result<Vector> {
    if !p.is_solved() {
        return Err(ProblemError::Unsolved(p.id.clone()));
    }
    match p.solutions.as_slice() {
        [x] => Ok(x.clone()),
        other => Err(ProblemError::InvalidInput(format!(
            "problem {} has {} solutions; gluing needs exactly one",
            p.id,
            other.len()
        ))),
    }
}

/// Distance from the carrier projection of `x` to each problem's solution.
pub fn glue_quality(x: &Vector, problems: &[LocalProblem]) -> Result<Vec<f64>> {
    problems
        .iter()
        .map(|p| Ok(p.carrier().project(x).dist(&singleton_solution(p)?)))
        .collect()
}

/// Intersect the affine preimages `solution_k + carrier_k^perp` and
/// classify the outcome.
pub fn glue(problems: &[LocalProblem]) -> Result<GlueResult> {
    if problems.is_empty() {
        return Err(ProblemError::InvalidInput("empty problem family".into()));
    }
    let n = problems[0].ambient_dim();
    if problems.iter().any(|p| p.ambient_dim() != n) {
        return Err(ProblemError::InvalidInput(
            "problems live in different ambient spaces".into(),
        ));
    }
    let mut sets = Vec::with_capacity(problems.len());
    for p in problems {
        let x_hat = singleton_solution(p)?;
        sets.push(AffineSet {
            point: x_hat,
            directions: p.carrier().complement(),
        });
    }
    let inter = crate::space::intersect_affine(&sets).map_err(ProblemError::Space)?;
    let unique = inter.directions.dim() == 0;
    let consistent = inter.residual <= GLUE_TOL;
    let status = match (unique, consistent) {
        (_, false) => GlueStatus::Inconsistent,
        (true, true) if inter.rows == inter.rank => GlueStatus::ExactPoint,
        (true, true) => GlueStatus::OverdeterminedConsistent,
        (false, true) => GlueStatus::Underdetermined,
    };
    let affine = (status == GlueStatus::Underdetermined).then(|| AffineSet {
        point: inter.witness.clone(),
        directions: inter.directions.clone(),
    });
    let quality = glue_quality(&inter.witness, problems)?;
    Ok(GlueResult {
        status,
        point: inter.witness,
        residual: inter.residual,
        rank: inter.rank,
        equations: inter.rows,
        affine,
        quality,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityReport {
    pub separable: bool,
    /// True when every cross-block coefficient vanished exactly in rational
    /// arithmetic; false when the verdict leaned on the 1e-10 tolerance.
    pub exact: bool,
    /// Largest |coefficient| of a monomial mixing two blocks, relative to
    /// the largest coefficient overall.
    pub max_mixed: f64,
    pub blocks: Vec<usize>,
}

/// Does `u` split as a sum of functions of the individual block
/// coordinates? The blocks are rotated to the front via an adapted
/// orthonormal basis (blocks first, then the orthogonal complement of their
/// sum) and the rotated polynomial is scanned for monomials touching two
/// different blocks. The substitution is exact rational arithmetic; the
/// verdict tolerates cross terms below 1e-10 relative magnitude, which arise
/// when block bases are not exactly representable.
pub fn check_separability(u: &QPoly, blocks: &[Subspace]) -> Result<SeparabilityReport> {
    let n = u.nvars();
    if blocks.iter().any(|b| b.ambient_dim() != n) {
        return Err(ProblemError::InvalidInput(
            "block ambient dimension mismatch".into(),
        ));
    }
    // adapted basis: block bases in order, then the complement of the sum
    let mut adapted: Vec<Vector> = Vec::new();
    let mut block_of_var: Vec<usize> = Vec::new();
    for (bi, b) in blocks.iter().enumerate() {
        for v in b.basis() {
            adapted.push(v.clone());
            block_of_var.push(bi);
        }
    }
    let span = Subspace::new(n, &adapted).map_err(ProblemError::Space)?;
    if span.dim() != adapted.len() {
        return Err(ProblemError::InvalidInput(
            "blocks overlap: adapted basis is dependent".into(),
        ));
    }
    for v in span.complement().basis() {
        adapted.push(v.clone());
        block_of_var.push(blocks.len()); // residual block
    }
    // rotate: x = C t with C columns = adapted basis vectors, exactly
    let cols: Vec<Vec<num_rational::BigRational>> = adapted
        .iter()
        .map(|v| v.0.iter().map(|&x| crate::qlin::qfrom_f64(x)).collect())
        .collect();
    let rotated = u.restrict_to_span(&cols); // full-dimensional: a pure rotation
    let scale = rotated.max_abs_coeff().max(1.0);
    let mut max_mixed = 0.0_f64;
    let mut exact = true;
    for (m, c) in rotated.terms() {
        let touched: std::collections::BTreeSet<usize> = m
            .0
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(i, _)| block_of_var[i])
            .collect();
        if touched.len() > 1 {
            exact = false;
            let mag = crate::qlin::qto_f64(c).abs() / scale;
            max_mixed = max_mixed.max(mag);
        }
    }
    Ok(SeparabilityReport {
        separable: max_mixed <= 1e-10,
        exact,
        max_mixed,
        blocks: blocks.iter().map(|b| b.dim()).collect(),
    })
}

/// The hypotheses under which the glued point is certified to be the global
/// argmax of `utility` over the product of the feasible regions: the
/// carriers are mutually orthogonal and span the space, the utility
/// separates across them, and it is strictly concave.
#[derive(Debug, Clone, Serialize)]
pub struct GlueCertificate {
    pub direct_sum: bool,
    pub separable: bool,
    pub strictly_concave: bool,
    pub concavity_exact: bool,
    pub certified: bool,
}

pub fn certify_glue(problems: &[LocalProblem], utility: &QPoly) -> Result<GlueCertificate> {
    let n = utility.nvars();
    let total: usize = problems.iter().map(|p| p.carrier().dim()).sum();
    let mut orthogonal = true;
    for i in 0..problems.len() {
        for j in i + 1..problems.len() {
            for a in problems[i].carrier().basis() {
                for b in problems[j].carrier().basis() {
                    if a.dot(b).abs() > GLUE_TOL {
                        orthogonal = false;
                    }
                }
            }
        }
    }
    let direct_sum = total == n && orthogonal;
    let sep = check_separability(
        utility,
        &problems
            .iter()
            .map(|p| p.carrier().clone())
            .collect::<Vec<_>>(),
    )?;
    let conc = is_strictly_concave(&utility.to_float(), &Subspace::full(n));
    Ok(GlueCertificate {
        direct_sum,
        separable: sep.separable,
        strictly_concave: conc.strictly_concave,
        concavity_exact: conc.exact,
        certified: direct_sum && sep.separable && conc.strictly_concave,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{demo_utility, qpoly, QPoly};
    use crate::space::{FeasibleSet, Shape};
    use rand::{Rng, SeedableRng};

    fn v(c: &[f64]) -> Vector {
        Vector(c.to_vec())
    }

    fn axis_problem(id: &str, n: usize, axis: usize, u: QPoly) -> LocalProblem {
        let mut b = vec![0.0; n];
        b[axis] = 1.0;
        let f = FeasibleSet::new(
            Subspace::new(n, &[v(&b)]).unwrap(),
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

    #[test]
    fn two_axis_example_glues_to_the_known_point() {
        let p1 = axis_problem("x_axis", 2, 0, demo_utility());
        let p2 = axis_problem("y_axis", 2, 1, demo_utility());
        let g = glue(&[p1, p2]).unwrap();
        assert_eq!(g.status, GlueStatus::ExactPoint);
        // dyadic data end to end: the result is exact in f64
        assert_eq!(g.point.0[0], 0.5);
        assert_eq!(g.point.0[1], 1.0);
        assert!(g.residual <= 1e-12);
        assert_eq!(g.rank, 2);
        assert_eq!(g.equations, 2);
        assert!(g.quality.iter().all(|d| *d <= 1e-12));
    }

    #[test]
    fn three_axes_recover_the_componentwise_point() {
        // u = 3 - (x-1/4)^2 - (y-1/2)^2 - (z-3/4)^2, separable with interior
        // componentwise maxima on [0,1]^3 sections
        let u = qpoly(
            3,
            &[
                (3, &[0, 0, 0]),
                (-16, &[2, 0, 0]),
                (8, &[1, 0, 0]),
                (-16, &[0, 2, 0]),
                (16, &[0, 1, 0]),
                (-16, &[0, 0, 2]),
                (24, &[0, 0, 1]),
            ],
        )
        .scale(&num_rational::BigRational::new(1.into(), 16.into()));
        let p1 = axis_problem("e1", 3, 0, u.clone());
        let p2 = axis_problem("e2", 3, 1, u.clone());
        let p3 = axis_problem("e3", 3, 2, u.clone());
        assert!(p1.solutions[0].approx_eq(&v(&[0.25, 0.0, 0.0]), 1e-9));
        let g = glue(&[p1, p2, p3]).unwrap();
        assert_eq!(g.status, GlueStatus::ExactPoint);
        assert!(g.point.approx_eq(&v(&[0.25, 0.5, 0.75]), 1e-9));
    }

    #[test]
    fn same_carrier_twice_with_conflicting_points_is_inconsistent() {
        let p1 = axis_problem("a", 2, 0, qpoly(2, &[(1, &[1, 0])])); // argmax x=1
        let mut p2 = p1.clone();
        p2.id = "b".into();
        p2.solutions = vec![v(&[0.25, 0.0])];
        let g = glue(&[p1, p2]).unwrap();
        assert_eq!(g.status, GlueStatus::Inconsistent);
        assert!(g.residual > 1e-3);
        // least-squares witness lands between the two pinned points
        assert!((g.point.0[0] - 0.625).abs() <= 1e-9);
    }

    #[test]
    fn single_problem_in_the_plane_is_underdetermined() {
        let p = axis_problem("only", 2, 0, demo_utility());
        let g = glue(&[p]).unwrap();
        assert_eq!(g.status, GlueStatus::Underdetermined);
        let aff = g.affine.expect("solution set");
        assert_eq!(aff.directions.dim(), 1);
        assert!(aff.contains(&v(&[0.5, 7.0]), 1e-9));
        assert!(!aff.contains(&v(&[0.6, 7.0]), 1e-9));
    }

    #[test]
    fn redundant_third_carrier_is_overdetermined_but_consistent() {
        let p1 = axis_problem("x_axis", 2, 0, demo_utility());
        let p2 = axis_problem("y_axis", 2, 1, demo_utility());
        // diagonal carrier whose pinned point is the projection of (1/2, 1)
        let diag = Subspace::new(2, &[v(&[1.0, 1.0])]).unwrap();
        let f = FeasibleSet::new(
            diag.clone(),
            Shape::Box {
                lower: vec![-2.0],
                upper: vec![2.0],
            },
        )
        .unwrap();
        let mut p3 = LocalProblem::new("diag", f, demo_utility()).unwrap();
        p3.solve().unwrap();
        // the restriction of the demo utility to the diagonal peaks at the
        // projection of the unconstrained maximum (strict concavity)
        let expected = diag.project(&v(&[0.5, 1.0]));
        assert!(p3.solutions[0].approx_eq(&expected, 1e-9));
        let g = glue(&[p1, p2, p3]).unwrap();
        assert_eq!(g.status, GlueStatus::OverdeterminedConsistent);
        assert!(g.point.approx_eq(&v(&[0.5, 1.0]), 1e-9));
        assert_eq!(g.equations, 3);
        assert_eq!(g.rank, 2);
    }

    #[test]
    fn glue_is_order_independent() {
        let p1 = axis_problem("x_axis", 2, 0, demo_utility());
        let p2 = axis_problem("y_axis", 2, 1, demo_utility());
        let a = glue(&[p1.clone(), p2.clone()]).unwrap();
        let b = glue(&[p2, p1]).unwrap();
        assert!(a.point.approx_eq(&b.point, 1e-12));
        assert_eq!(a.status, b.status);
    }

    #[test]
    fn glue_commutes_with_rotation() {
        // rotate a three-block family in R^3 by a fixed orthogonal matrix
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let m = nalgebra::DMatrix::<f64>::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let q = m.qr().q();
            let sol = [
                v(&[0.25, 0.0, 0.0]),
                v(&[0.0, 0.5, 0.0]),
                v(&[0.0, 0.0, 0.75]),
            ];
            let plain: Vec<LocalProblem> = (0..3)
                .map(|i| {
                    let mut b = vec![0.0; 3];
                    b[i] = 1.0;
                    let f = FeasibleSet::new(
                        Subspace::new(3, &[v(&b)]).unwrap(),
                        Shape::Box {
                            lower: vec![-1.0],
                            upper: vec![1.0],
                        },
                    )
                    .unwrap();
                    let mut p =
                        LocalProblem::new(format!("p{i}"), f, qpoly(3, &[(1, &[0, 0, 0])]))
                            .unwrap();
                    p.solutions = vec![sol[i].clone()];
                    p.value = Some(0.0);
                    p
                })
                .collect();
            let rotated: Vec<LocalProblem> = plain
                .iter()
                .map(|p| {
                    let rb: Vec<Vector> = p
                        .carrier()
                        .basis()
                        .iter()
                        .map(|bv| {
                            let x = &q * nalgebra::DVector::from_column_slice(&bv.0);
                            Vector(x.as_slice().to_vec())
                        })
                        .collect();
                    let f = FeasibleSet::new(
                        Subspace::new(3, &rb).unwrap(),
                        Shape::Box {
                            lower: vec![-1.0],
                            upper: vec![1.0],
                        },
                    )
                    .unwrap();
                    let mut r =
                        LocalProblem::new(format!("{}_rot", p.id), f, p.utility.clone())
                            .unwrap();
                    let xs = &q * nalgebra::DVector::from_column_slice(&p.solutions[0].0);
                    r.solutions = vec![Vector(xs.as_slice().to_vec())];
                    r.value = Some(0.0);
                    r
                })
                .collect();
            let g_plain = glue(&plain).unwrap();
            let g_rot = glue(&rotated).unwrap();
            let expect = &q * nalgebra::DVector::from_column_slice(&g_plain.point.0);
            assert_eq!(g_rot.status, GlueStatus::ExactPoint);
            assert!(g_rot.point.approx_eq(&Vector(expect.as_slice().to_vec()), 1e-9));
        }
    }

    /// Random separable concave quadratics over coordinate blocks: the glued
    /// point must match the clamp-form global argmax of the box problem.
    #[test]
    fn separable_families_glue_to_the_global_argmax() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
        for _case in 0..30 {
            let n = rng.gen_range(2..=4usize);
            // partition 0..n into consecutive blocks of size 1 or 2
            let mut blocks: Vec<Vec<usize>> = Vec::new();
            let mut i = 0;
            while i < n {
                let w = if n - i >= 2 && rng.gen_bool(0.4) { 2 } else { 1 };
                blocks.push((i..i + w).collect());
                i += w;
            }
            // u = sum_i -a_i (x_i - c_i)^2 with a_i > 0, dyadic data
            let mut terms: Vec<(i64, Vec<u32>)> = Vec::new();
            let mut centers = vec![0.0; n];
            for d in 0..n {
                let a = rng.gen_range(1..=8i64);
                let c_num = rng.gen_range(-6..=10i64); // center c = c_num / 4
                centers[d] = c_num as f64 / 4.0;
                let mut e2 = vec![0u32; n];
                e2[d] = 2;
                let mut e1 = vec![0u32; n];
                e1[d] = 1;
                terms.push((-16 * a, e2));
                terms.push((8 * a * c_num, e1));
            }
            let u = qpoly(
                n,
                &terms
                    .iter()
                    .map(|(c, e)| (*c, e.as_slice()))
                    .collect::<Vec<_>>(),
            )
            .scale(&num_rational::BigRational::new(1.into(), 16.into()));
            let problems: Vec<LocalProblem> = blocks
                .iter()
                .enumerate()
                .map(|(bi, vars)| {
                    let basis: Vec<Vector> = vars
                        .iter()
                        .map(|&d| {
                            let mut b = vec![0.0; n];
                            b[d] = 1.0;
                            v(&b)
                        })
                        .collect();
                    let f = FeasibleSet::new(
                        Subspace::new(n, &basis).unwrap(),
                        Shape::Box {
                            lower: vec![0.0; vars.len()],
                            upper: vec![1.0; vars.len()],
                        },
                    )
                    .unwrap();
                    let mut p = LocalProblem::new(format!("b{bi}"), f, u.clone()).unwrap();
                    p.solve().unwrap();
                    p
                })
                .collect();
            let g = glue(&problems).unwrap();
            assert_eq!(g.status, GlueStatus::ExactPoint, "case {_case}");
            let oracle: Vec<f64> = centers.iter().map(|c| c.clamp(0.0, 1.0)).collect();
            assert!(
                g.point.approx_eq(&v(&oracle), 1e-9),
                "case {_case}: glued {:?} vs clamp oracle {:?}",
                g.point,
                oracle
            );
            let cert = certify_glue(&problems, &u).unwrap();
            assert!(cert.certified);
        }
    }

    #[test]
    fn separability_detects_clean_split_and_cross_terms() {
        let axes = [
            Subspace::new(2, &[v(&[1.0, 0.0])]).unwrap(),
            Subspace::new(2, &[v(&[0.0, 1.0])]).unwrap(),
        ];
        let rep = check_separability(&demo_utility(), &axes).unwrap();
        assert!(rep.separable && rep.exact);
        assert_eq!(rep.max_mixed, 0.0);

        let coupled = demo_utility().sub(&qpoly(2, &[(1, &[1, 1])])); // subtract xy
        let rep = check_separability(&coupled, &axes).unwrap();
        assert!(!rep.separable);
        assert!(rep.max_mixed > 0.1);
    }

    #[test]
    fn separability_holds_across_rotated_blocks_within_tolerance() {
        // -(x+y)^2 - (x-y)^2 separates across the two diagonal lines
        let u = qpoly(2, &[(-2, &[2, 0]), (-2, &[0, 2])]); // = -(x+y)^2 - (x-y)^2
        let blocks = [
            Subspace::new(2, &[v(&[1.0, 1.0])]).unwrap(),
            Subspace::new(2, &[v(&[1.0, -1.0])]).unwrap(),
        ];
        let rep = check_separability(&u, &blocks).unwrap();
        assert!(rep.separable);
        assert!(rep.max_mixed <= 1e-10);
    }

    #[test]
    fn certificate_reports_missing_hypotheses() {
        // one axis only: not a direct sum of the plane
        let p1 = axis_problem("x_axis", 2, 0, demo_utility());
        let cert = certify_glue(std::slice::from_ref(&p1), &demo_utility()).unwrap();
        assert!(!cert.direct_sum);
        assert!(!cert.certified);
        // coupled utility across both axes: separability fails
        let p2 = axis_problem("y_axis", 2, 1, demo_utility());
        let coupled = demo_utility().sub(&qpoly(2, &[(1, &[1, 1])]));
        let cert = certify_glue(&[p1, p2], &coupled).unwrap();
        assert!(cert.direct_sum);
        assert!(!cert.separable);
        assert!(!cert.certified);
    }
}
