//! Local maximization of polynomial utilities over compact convex feasible
//! sets.
//!
//! Strategy ladder, decided from the utility's restriction to the carrier:
//!
//! - constant restriction: the whole feasible set maximizes; flagged
//!   degenerate, a deterministic representative is returned;
//! - linear restriction: exact vertex evaluation on boxes/polytopes, closed
//!   form on balls;
//! - strictly concave quadratic restriction (carrier dimension <= 4): exact
//!   active-set enumeration over faces, or trust-region style boundary solve
//!   on balls — the unique maximizer up to linear-solve accuracy;
//! - anything else: dense grid scan followed by projected-gradient polish,
//!   returning every near-optimal cluster (distinct maximizers further apart
//!   than 1e-4 whose values are within 1e-6 of the best).
//!
//! Certificates record the method, the attained value, and a first-order
//! residual |P_F(t + grad q(t)) - t| measured at the returned points.

use crate::poly::FPoly;
use crate::qlin::{qfrom_f64, QMat};
use crate::space::{
    box_rows, combinations, dedup_points, nullspace_rows, FeasibleSet, Shape, SpaceError, Vector,
};
use crate::space::Subspace;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("solver cap exceeded: {0}")]
    CapExceeded(String),
}

type Result<T> = std::result::Result<T, SolveError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Degenerate,
    LinearExact,
    ConcaveExact,
    GridPolish,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub method: SolveMethod,
    pub value: f64,
    pub first_order_residual: f64,
    pub strictly_concave: bool,
    pub concavity_exact: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct LocalSolution {
    /// Maximizers in ambient coordinates, deduplicated, lexicographically
    /// sorted.
    pub points: Vec<Vector>,
    pub value: f64,
    pub certificate: Certificate,
}

/// Concavity verdict for a restriction; `exact` distinguishes the rational
/// principal-minor test (degree <= 2) from the sampled Hessian test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConcavityReport {
    pub strictly_concave: bool,
    pub exact: bool,
}

/// Decide strict concavity of `p` restricted to the subspace `s`.
///
/// Degree <= 2: the Hessian is constant; negative definiteness is decided
/// exactly by the alternating-sign test on leading principal minors in
/// rational arithmetic. Higher degree: the Hessian is sampled at 100 points
/// of [-1,1]^d and all eigenvalues must be negative — a numerical verdict.
pub fn is_strictly_concave(p: &FPoly, s: &Subspace) -> ConcavityReport {
    let basis: Vec<Vec<f64>> = s.basis().iter().map(|b| b.0.clone()).collect();
    let q = p.restrict_to_span(&basis);
    let d = s.dim();
    if d == 0 {
        return ConcavityReport {
            strictly_concave: true,
            exact: true,
        };
    }
    match q.degree() {
        None | Some(0) | Some(1) => ConcavityReport {
            strictly_concave: false,
            exact: true,
        },
        Some(2) => {
            let h = hessian_matrix(&q, d);
            let mut ok = true;
            for k in 1..=d {
                let sub = QMat::from_rows(
                    (0..k)
                        .map(|i| (0..k).map(|j| qfrom_f64(h[(i, j)])).collect())
                        .collect(),
                );
                let det = sub.det();
                let want_positive = k % 2 == 0;
                let positive = det > crate::qlin::qzero();
                let negative = det < crate::qlin::qzero();
                if (want_positive && !positive) || (!want_positive && !negative) {
                    ok = false;
                    break;
                }
            }
            ConcavityReport {
                strictly_concave: ok,
                exact: true,
            }
        }
        Some(_) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
            let hessians: Vec<Vec<FPoly>> = (0..d)
                .map(|i| (0..d).map(|j| q.partial(i).partial(j)).collect())
                .collect();
            for _ in 0..100 {
                let t: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let h = DMatrix::from_fn(d, d, |i, j| hessians[i][j].eval_f64(&t));
                let sym = (h.clone() + h.transpose()).scale(0.5);
                let eig = sym.symmetric_eigen();
                if eig.eigenvalues.iter().any(|&l| l >= -1e-12) {
                    return ConcavityReport {
                        strictly_concave: false,
                        exact: false,
                    };
                }
            }
            ConcavityReport {
                strictly_concave: true,
                exact: false,
            }
        }
    }
}

/// Constant Hessian of a degree-<=2 polynomial in d variables.
fn hessian_matrix(q: &FPoly, d: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(d, d);
    for (m, &c) in q.terms() {
        if m.total_degree() != 2 {
            continue;
        }
        let idx: Vec<usize> = m
            .0
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat(i).take(e as usize))
            .collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            h[(i, i)] += 2.0 * c;
        } else {
            h[(i, j)] += c;
            h[(j, i)] += c;
        }
    }
    h
}

fn gradient_vector(q: &FPoly, d: usize) -> Vec<f64> {
    (0..d)
        .map(|i| q.coeff(&crate::poly::Monomial::var(d, i)))
        .collect()
}

fn shape_rows(shape: &Shape) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    match shape {
        Shape::Box { lower, upper } => Some(box_rows(lower, upper)),
        Shape::Polytope { a, b } => Some((a.clone(), b.clone())),
        Shape::Ball { .. } => None,
    }
}

/// First-order optimality residual at `t`: distance between `t` and the
/// feasible projection of one ascent step.
fn stationarity_residual(q: &FPoly, f: &FeasibleSet, t: &[f64]) -> f64 {
    let g = q.gradient().iter().map(|p| p.eval_f64(t)).collect::<Vec<_>>();
    let stepped: Vec<f64> = t.iter().zip(&g).map(|(x, gi)| x + gi).collect();
    match f.closest_in_shape(&stepped) {
        Ok(p) => p
            .iter()
            .zip(t)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
        Err(_) => f64::NAN,
    }
}

/// Maximize `utility` (an ambient polynomial) over `feasible`.
pub fn solve_local(utility: &FPoly, feasible: &FeasibleSet) -> Result<LocalSolution> {
    let d = feasible.dim();
    let basis: Vec<Vec<f64>> = feasible
        .carrier
        .basis()
        .iter()
        .map(|b| b.0.clone())
        .collect();
    let q = utility.restrict_to_span(&basis);
    let concavity = is_strictly_concave(utility, &feasible.carrier);

    let (mut pts, method): (Vec<Vec<f64>>, SolveMethod) = match q.degree() {
        None | Some(0) => {
            let rep = feasible.representative()?;
            (
                vec![feasible.carrier.coords(&rep)],
                SolveMethod::Degenerate,
            )
        }
        Some(1) => (solve_linear(&q, feasible)?, SolveMethod::LinearExact),
        Some(2) if concavity.strictly_concave && concavity.exact && d <= 4 => {
            (solve_concave_quadratic(&q, feasible)?, SolveMethod::ConcaveExact)
        }
        Some(_) => (solve_grid_polish(&q, feasible, 1e-2)?, SolveMethod::GridPolish),
    };

    pts.retain(|t| feasible.shape_contains(t, 1e-7));
    if pts.is_empty() {
        return Err(SolveError::CapExceeded(
            "no feasible candidate survived filtering".into(),
        ));
    }
    let best = pts
        .iter()
        .map(|t| q.eval_f64(t))
        .fold(f64::NEG_INFINITY, f64::max);
    pts.retain(|t| q.eval_f64(t) >= best - 1e-6);
    // cluster: distinct maximizers must sit further apart than 1e-4
    let mut clustered: Vec<Vec<f64>> = Vec::new();
    pts.sort_by(|a, b| q.eval_f64(b).total_cmp(&q.eval_f64(a)));
    for t in pts {
        if !clustered
            .iter()
            .any(|u| dist(u, &t) <= 1e-4)
        {
            clustered.push(t);
        }
    }
    let residual = clustered
        .iter()
        .map(|t| stationarity_residual(&q, feasible, t))
        .fold(0.0, f64::max);
    let points = dedup_points(
        clustered
            .iter()
            .map(|t| feasible.carrier.embed(t))
            .collect(),
        1e-9,
    );
    let degenerate = method == SolveMethod::Degenerate;
    Ok(LocalSolution {
        points,
        value: best,
        certificate: Certificate {
            method,
            value: best,
            first_order_residual: if degenerate { 0.0 } else { residual },
            strictly_concave: concavity.strictly_concave,
            concavity_exact: concavity.exact,
            degenerate,
        },
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Linear objective: vertex evaluation for polytopal shapes, closed form on
/// balls.
fn solve_linear(q: &FPoly, feasible: &FeasibleSet) -> Result<Vec<Vec<f64>>> {
    let d = feasible.dim();
    let g = gradient_vector(q, d);
    match &feasible.shape {
        Shape::Ball { center, radius } => {
            let norm = dist(&g, &vec![0.0; d]);
            Ok(vec![center
                .iter()
                .zip(&g)
                .map(|(c, gi)| c + radius * gi / norm)
                .collect()])
        }
        _ => {
            let verts = feasible.shape_vertices()?;
            let best = verts
                .iter()
                .map(|v| q.eval_f64(v))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(verts
                .into_iter()
                .filter(|v| q.eval_f64(v) >= best - 1e-9)
                .collect())
        }
    }
}

/// Strictly concave quadratic: exact unconstrained stationary point if
/// feasible, otherwise active-set enumeration over faces (polytopal) or a
/// boundary trust-region solve (ball).
fn solve_concave_quadratic(q: &FPoly, feasible: &FeasibleSet) -> Result<Vec<Vec<f64>>> {
    let d = feasible.dim();
    let h = hessian_matrix(q, d);
    let g = DVector::from_vec(gradient_vector(q, d));
    let unconstrained = h
        .clone()
        .lu()
        .solve(&(-&g))
        .ok_or_else(|| SolveError::CapExceeded("singular Hessian on concave path".into()))?;
    let t_u: Vec<f64> = unconstrained.iter().cloned().collect();
    if feasible.shape_contains(&t_u, 1e-12) {
        return Ok(vec![t_u]);
    }
    match &feasible.shape {
        Shape::Ball { center, radius } => {
            let c = DVector::from_vec(center.clone());
            let g_shift = &g + &h * &c;
            // maximize on the boundary: (H - nu I) s = -g_shift, |s| = radius,
            // nu >= 0; |s(nu)| decreases in nu, bisect.
            let s_of = |nu: f64| -> Option<DVector<f64>> {
                let m = &h - DMatrix::identity(d, d).scale(nu);
                m.lu().solve(&(-&g_shift))
            };
            let mut lo = 0.0;
            let mut hi = 1.0;
            while let Some(s) = s_of(hi) {
                if s.norm() < *radius {
                    break;
                }
                hi *= 2.0;
                if hi > 1e12 {
                    return Err(SolveError::CapExceeded("ball boundary solve diverged".into()));
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                match s_of(mid) {
                    Some(s) if s.norm() > *radius => lo = mid,
                    _ => hi = mid,
                }
            }
            let s = s_of(0.5 * (lo + hi))
                .ok_or_else(|| SolveError::CapExceeded("ball boundary solve failed".into()))?;
            Ok(vec![(0..d).map(|i| center[i] + s[i]).collect()])
        }
        _ => {
            let (a, b) = shape_rows(&feasible.shape).expect("polytopal shape");
            let m = a.len();
            let mut best: Option<(f64, Vec<f64>)> = None;
            for k in 1..=d.min(m) {
                combinations(m, k, |rows| {
                    let aw = DMatrix::from_fn(k, d, |r, c| a[rows[r]][c]);
                    let bw = DVector::from_fn(k, |r, _| b[rows[r]]);
                    // particular point on the face
                    let svd = aw.clone().svd(true, true);
                    let Ok(t0) = svd.solve(&bw, 1e-10) else {
                        return;
                    };
                    if (&aw * &t0 - &bw).amax() > 1e-8 {
                        return; // inconsistent equality subset
                    }
                    let null = nullspace_rows(&aw, 1e-10);
                    let t_star: DVector<f64> = if null.is_empty() {
                        t0
                    } else {
                        let nmat = DMatrix::from_fn(d, null.len(), |r, c| null[c][r]);
                        let hr = nmat.transpose() * &h * &nmat;
                        let gr = nmat.transpose() * (&g + &h * &t0);
                        let Some(z) = hr.lu().solve(&(-gr)) else {
                            return;
                        };
                        &t0 + nmat * z
                    };
                    let t_vec: Vec<f64> = t_star.iter().cloned().collect();
                    if !a
                        .iter()
                        .zip(&b)
                        .all(|(row, bi)| row.iter().zip(&t_vec).map(|(x, y)| x * y).sum::<f64>() <= bi + 1e-9)
                    {
                        return;
                    }
                    let val = q.eval_f64(&t_vec);
                    match &best {
                        None => best = Some((val, t_vec)),
                        Some((bv, _)) if val > *bv => best = Some((val, t_vec)),
                        _ => {}
                    }
                });
            }
            best.map(|(_, t)| vec![t])
                .ok_or(SolveError::Space(SpaceError::EmptyFeasible))
        }
    }
}

/// Dense grid scan over the bounding box (default spacing 1e-2 per
/// coordinate, coarsened if the grid would exceed two million points)
/// followed by projected-gradient polish of the near-optimal seeds.
fn solve_grid_polish(q: &FPoly, feasible: &FeasibleSet, step: f64) -> Result<Vec<Vec<f64>>> {
    let d = feasible.dim();
    let (lo, hi) = feasible.bounding_box()?;
    let mut step = step;
    let counts = |s: f64| -> Vec<usize> {
        (0..d)
            .map(|i| ((hi[i] - lo[i]) / s).floor() as usize + 1)
            .collect()
    };
    while counts(step).iter().product::<usize>() > 2_000_000 {
        step *= 2.0;
    }
    let n = counts(step);
    let grad = q.gradient();

    // odometer over the grid
    let mut idx = vec![0usize; d];
    let mut best_val = f64::NEG_INFINITY;
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    loop {
        let t: Vec<f64> = (0..d)
            .map(|i| {
                let x = lo[i] + step * idx[i] as f64;
                x.min(hi[i])
            })
            .collect();
        if feasible.shape_contains(&t, 1e-9) {
            let v = q.eval_f64(&t);
            best_val = best_val.max(v);
            scored.push((v, t));
            if scored.len() > 4096 {
                scored.sort_by(|a, b| b.0.total_cmp(&a.0));
                scored.truncate(256);
            }
        }
        // advance odometer
        let mut i = 0;
        loop {
            if i == d {
                break;
            }
            idx[i] += 1;
            if idx[i] < n[i] {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == d {
            break;
        }
    }
    if scored.is_empty() {
        // fall back to the representative (tiny shapes can dodge the grid)
        let rep = feasible.representative()?;
        scored.push((0.0, feasible.carrier.coords(&rep)));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let seed_cut = best_val - 1e-4;
    let mut seeds: Vec<Vec<f64>> = scored
        .iter()
        .take_while(|(v, _)| *v >= seed_cut)
        .map(|(_, t)| t.clone())
        .collect();
    seeds.truncate(64);

    let mut out = Vec::new();
    for mut t in seeds {
        let mut alpha = 0.1;
        let mut val = q.eval_f64(&t);
        for _ in 0..5000 {
            let g: Vec<f64> = grad.iter().map(|p| p.eval_f64(&t)).collect();
            let stepped: Vec<f64> = t.iter().zip(&g).map(|(x, gi)| x + alpha * gi).collect();
            let cand = feasible.closest_in_shape(&stepped)?;
            let cval = q.eval_f64(&cand);
            if cval > val + 1e-16 {
                let moved = dist(&cand, &t);
                t = cand;
                val = cval;
                alpha *= 1.2;
                if moved < 1e-12 {
                    break;
                }
            } else {
                alpha *= 0.5;
                if alpha < 1e-14 {
                    break;
                }
            }
        }
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{demo_utility, fpoly};
    use crate::space::{FeasibleSet, Shape, Subspace, Vector};
    use rand::Rng;
    use rand::SeedableRng;

    fn v(c: &[f64]) -> Vector {
        Vector(c.to_vec())
    }

    fn axis_problem(axis: usize) -> FeasibleSet {
        let mut b = vec![0.0, 0.0];
        b[axis] = 1.0;
        FeasibleSet::new(
            Subspace::new(2, &[v(&b)]).unwrap(),
            Shape::Box {
                lower: vec![0.0],
                upper: vec![1.0],
            },
        )
        .unwrap()
    }

    /// Two-stage grid brute force: coarse sweep, then 1e-3 refinement around
    /// the best coarse point. Adequate for concave objectives.
    fn grid_oracle(q: &FPoly, f: &FeasibleSet) -> (Vec<f64>, f64) {
        let d = f.dim();
        let (lo, hi) = f.bounding_box().unwrap();
        let sweep = |lo: &[f64], hi: &[f64], steps: usize| -> (Vec<f64>, f64) {
            let mut best = (vec![], f64::NEG_INFINITY);
            let mut idx = vec![0usize; d];
            loop {
                let t: Vec<f64> = (0..d)
                    .map(|i| lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / steps as f64)
                    .collect();
                if f.shape_contains(&t, 1e-9) {
                    let val = q.eval_f64(&t);
                    if val > best.1 {
                        best = (t, val);
                    }
                }
                let mut i = 0;
                while i < d {
                    idx[i] += 1;
                    if idx[i] <= steps {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == d {
                    break;
                }
            }
            best
        };
        let coarse = sweep(&lo, &hi, 60);
        let delta: Vec<f64> = (0..d).map(|i| (hi[i] - lo[i]) / 60.0).collect();
        let flo: Vec<f64> = (0..d)
            .map(|i| (coarse.0[i] - 2.0 * delta[i]).max(lo[i]))
            .collect();
        let fhi: Vec<f64> = (0..d)
            .map(|i| (coarse.0[i] + 2.0 * delta[i]).min(hi[i]))
            .collect();
        let steps = (0..d)
            .map(|i| ((fhi[i] - flo[i]) / 1e-3).ceil() as usize)
            .max()
            .unwrap_or(1)
            .max(1);
        sweep(&flo, &fhi, steps)
    }

    #[test]
    fn demo_axis_problems_solved_exactly() {
        let u = demo_utility().to_float();
        let sx = solve_local(&u, &axis_problem(0)).unwrap();
        assert_eq!(sx.points.len(), 1);
        assert!(sx.points[0].approx_eq(&v(&[0.5, 0.0]), 1e-12));
        assert!((sx.value - 3.25).abs() <= 1e-12);
        assert_eq!(sx.certificate.method, SolveMethod::ConcaveExact);

        let sy = solve_local(&u, &axis_problem(1)).unwrap();
        assert!(sy.points[0].approx_eq(&v(&[0.0, 1.0]), 1e-12));
        assert!((sy.value - 4.0).abs() <= 1e-12);
    }

    #[test]
    fn linear_on_triangle_hits_vertex() {
        // maximize x + 2y over x+y<=1, x,y>=0
        let u = fpoly(2, &[(1.0, &[1, 0]), (2.0, &[0, 1])]);
        let tri = FeasibleSet::new(
            Subspace::full(2),
            Shape::Polytope {
                a: vec![vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
                b: vec![1.0, 0.0, 0.0],
            },
        )
        .unwrap();
        let s = solve_local(&u, &tri).unwrap();
        assert_eq!(s.points.len(), 1);
        assert!(s.points[0].approx_eq(&v(&[0.0, 1.0]), 1e-12));
        assert!((s.value - 2.0).abs() <= 1e-12);
        assert_eq!(s.certificate.method, SolveMethod::LinearExact);
    }

    #[test]
    fn quartic_finds_both_maxima() {
        // -(t^2 - 1)^2 on [-2, 2]: maxima at -1 and 1, value 0
        let u = fpoly(1, &[(-1.0, &[4]), (2.0, &[2]), (-1.0, &[0])]);
        let f = FeasibleSet::new(
            Subspace::full(1),
            Shape::Box {
                lower: vec![-2.0],
                upper: vec![2.0],
            },
        )
        .unwrap();
        let s = solve_local(&u, &f).unwrap();
        assert_eq!(s.certificate.method, SolveMethod::GridPolish);
        assert_eq!(s.points.len(), 2, "points: {:?}", s.points);
        assert!((s.points[0].0[0] + 1.0).abs() <= 1e-6);
        assert!((s.points[1].0[0] - 1.0).abs() <= 1e-6);
        assert!(s.value.abs() <= 1e-9);
    }

    #[test]
    fn ball_boundary_closed_form() {
        // demo utility on a radius-1/2 ball at the origin: boundary optimum
        // at R*(1,2)/sqrt(5), value 3 - R^2 + R*sqrt(5)
        let u = demo_utility().to_float();
        let f = FeasibleSet::new(
            Subspace::full(2),
            Shape::Ball {
                center: vec![0.0, 0.0],
                radius: 0.5,
            },
        )
        .unwrap();
        let s = solve_local(&u, &f).unwrap();
        let r5 = 5.0_f64.sqrt();
        let expect = v(&[0.5 / r5, 1.0 / r5]);
        assert!(s.points[0].approx_eq(&expect, 1e-9), "{:?}", s.points);
        assert!((s.value - (2.75 + 0.5 * r5)).abs() <= 1e-9);
    }

    #[test]
    fn concavity_verdicts() {
        let full = Subspace::full(2);
        assert!(is_strictly_concave(&demo_utility().to_float(), &full).strictly_concave);
        assert!(is_strictly_concave(&demo_utility().to_float(), &full).exact);
        let linear = fpoly(2, &[(1.0, &[1, 0]), (2.0, &[0, 1])]);
        assert!(!is_strictly_concave(&linear, &full).strictly_concave);
        let saddle = fpoly(2, &[(1.0, &[2, 0]), (-1.0, &[0, 2])]);
        assert!(!is_strictly_concave(&saddle, &full).strictly_concave);
        let quartic = fpoly(2, &[(-1.0, &[4, 0]), (-1.0, &[0, 4]), (-0.1, &[2, 0]), (-0.1, &[0, 2])]);
        let rep = is_strictly_concave(&quartic, &full);
        assert!(rep.strictly_concave && !rep.exact);
        let convex_quartic = fpoly(2, &[(1.0, &[4, 0]), (1.0, &[0, 4])]);
        assert!(!is_strictly_concave(&convex_quartic, &full).strictly_concave);
        // restriction to the x-axis of the demo utility: 3 + t - t^2
        let x_axis = Subspace::new(2, &[Vector(vec![1.0, 0.0])]).unwrap();
        assert!(is_strictly_concave(&demo_utility().to_float(), &x_axis).strictly_concave);
    }

    #[test]
    fn constant_utility_flagged_degenerate() {
        let u = fpoly(2, &[(5.0, &[0, 0])]);
        let tri = FeasibleSet::new(
            Subspace::full(2),
            Shape::Polytope {
                a: vec![vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
                b: vec![1.0, 0.0, 0.0],
            },
        )
        .unwrap();
        let s = solve_local(&u, &tri).unwrap();
        assert!(s.certificate.degenerate);
        assert!((s.value - 5.0).abs() <= 1e-12);
        assert!(tri.contains_ambient(&s.points[0], 1e-9));
    }

    #[test]
    fn random_concave_quadratics_match_grid_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let d = 1 + trial % 3; // dimensions 1..=3
            // random strictly concave quadratic: Q = -(M^T M + 0.3 I)
            let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
            let qm = -(m.transpose() * &m + DMatrix::identity(d, d).scale(0.3));
            let g: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut u = crate::poly::FPoly::zero(d);
            for i in 0..d {
                for j in i..d {
                    let c = if i == j { qm[(i, i)] / 2.0 } else { qm[(i, j)] };
                    let mut exps = vec![0u32; d];
                    exps[i] += 1;
                    exps[j] += 1;
                    u = u.add(&crate::poly::FPoly::from_terms(
                        d,
                        vec![(crate::poly::Monomial(exps), c)],
                    ));
                }
                let mut exps = vec![0u32; d];
                exps[i] = 1;
                u = u.add(&crate::poly::FPoly::from_terms(
                    d,
                    vec![(crate::poly::Monomial(exps), g[i])],
                ));
            }
            let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let w: f64 = rng.gen_range(0.3..0.7);
            let f = FeasibleSet::new(
                Subspace::full(d),
                Shape::Box {
                    lower: center.iter().map(|c| c - w).collect(),
                    upper: center.iter().map(|c| c + w).collect(),
                },
            )
            .unwrap();
            let s = solve_local(&u, &f).unwrap();
            assert_eq!(s.certificate.method, SolveMethod::ConcaveExact);
            let (ot, oval) = grid_oracle(&u, &f);
            let got = &s.points[0].0;
            assert!(
                dist(got, &ot) <= 2e-3,
                "trial {trial}: got {got:?} oracle {ot:?}"
            );
            assert!((s.value - oval).abs() <= 1e-5);
            // returned point feasible and attains the certified value
            assert!(f.contains_ambient(&s.points[0], 1e-9));
            assert!((u.eval_f64(got) - s.value).abs() <= 1e-9);
        }
    }

    #[test]
    fn separable_restrictions_recover_global_projection() {
        // Prop-3-style property on separable instances: the local solution of
        // the restriction to a coordinate subspace equals the feasible
        // projection of the global argmax.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let n = rng.gen_range(2..=4usize);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.5)).collect();
            // U = sum_i -a_i (x_i - c_i)^2
            let mut u = crate::poly::FPoly::zero(n);
            for i in 0..n {
                let mut e2 = vec![0u32; n];
                e2[i] = 2;
                let mut e1 = vec![0u32; n];
                e1[i] = 1;
                u = u.add(&crate::poly::FPoly::from_terms(
                    n,
                    vec![
                        (crate::poly::Monomial(e2), -a[i]),
                        (crate::poly::Monomial(e1), 2.0 * a[i] * c[i]),
                        (crate::poly::Monomial(vec![0; n]), -a[i] * c[i] * c[i]),
                    ],
                ));
            }
            // per-coordinate box [0,1]: global argmax is the clamp of c
            let global: Vec<f64> = c.iter().map(|ci| ci.clamp(0.0, 1.0)).collect();
            let k = rng.gen_range(1..=n.min(2));
            let coords: Vec<usize> = {
                let mut all: Vec<usize> = (0..n).collect();
                for i in (1..all.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    all.swap(i, j);
                }
                all.truncate(k);
                all.sort_unstable();
                all
            };
            let basis: Vec<Vector> = coords
                .iter()
                .map(|&i| {
                    let mut b = vec![0.0; n];
                    b[i] = 1.0;
                    Vector(b)
                })
                .collect();
            let f = FeasibleSet::new(
                Subspace::new(n, &basis).unwrap(),
                Shape::Box {
                    lower: vec![0.0; k],
                    upper: vec![1.0; k],
                },
            )
            .unwrap();
            let s = solve_local(&u, &f).unwrap();
            let gamma = crate::space::feasible_projection(&Vector(global.clone()), &f).unwrap();
            assert_eq!(s.points.len(), 1);
            assert!(
                s.points[0].approx_eq(&gamma[0], 1e-9),
                "solution {:?} vs projection {:?}",
                s.points[0],
                gamma[0]
            );
        }
    }
}
