//! Local problems and the structure connecting them: morphisms
//! (containment + restriction-equality + dimension), meets, the union
//! problem, and the membership predicate deciding whether a point's
//! closest-feasible projection lands in a problem's solution set.
//!
//! The consistency checks at the bottom ask, by sampling, whether local
//! solution sets are fragments of one global optimum: `check_presheaf` tests
//! the monotonicity of membership along a morphism, `check_gluing` tests the
//! two set inclusions relating the union problem's membership to the
//! intersection of the local memberships.
//!
//! Membership domains: the predicates are meaningful on the union of the
//! feasible sets, so the samplers draw points there (optionally clipped to a
//! caller-supplied box) rather than from the ambient space, where the
//! closest-point map would be queried far outside its intended domain.

use crate::poly::{FPoly, QPoly};
use crate::qlin::{self, qto_f64, QVec};
use crate::solver::{solve_local, Certificate, SolveError};
use crate::space::{
    feasible_projection, intersect_subspaces, FeasibleSet, Shape, SpaceError, Subspace, Vector,
};
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use serde::Serialize;
use thiserror::Error;

pub const MEMBER_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("problem {0} has not been solved")]
    Unsolved(String),
    #[error("feasible sets do not intersect")]
    EmptyIntersection,
    #[error("unsupported feasible-set combination: {0}")]
    UnsupportedShapes(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

type Result<T> = std::result::Result<T, ProblemError>;

/// A utility to maximize over a compact convex feasible region inside a
/// carrier subspace. Solutions are filled in by [`LocalProblem::solve`].
///
/// The carrier is owned by `feasible`; `carrier()` is the single source of
/// truth, so the carrier-consistency invariant holds by construction.
#[derive(Debug, Clone)]
pub struct LocalProblem {
    pub id: String,
    pub feasible: FeasibleSet,
    /// Utility in ambient variables, exact coefficients.
    pub utility: QPoly,
    utility_float: FPoly,
    /// Rational orthogonal (not normalized) basis of the carrier, for exact
    /// restriction tests.
    exact_basis: Vec<QVec>,
    pub solutions: Vec<Vector>,
    pub value: Option<f64>,
    pub certificate: Option<Certificate>,
}

impl LocalProblem {
    pub fn new(id: impl Into<String>, feasible: FeasibleSet, utility: QPoly) -> Result<Self> {
        if utility.nvars() != feasible.ambient_dim() {
            return Err(ProblemError::InvalidInput(format!(
                "utility has {} variables, ambient dimension is {}",
                utility.nvars(),
                feasible.ambient_dim()
            )));
        }
        let raw: Vec<QVec> = feasible
            .carrier
            .basis()
            .iter()
            .map(|b| b.0.iter().map(|&x| qlin::qfrom_f64(x)).collect())
            .collect();
        let exact_basis = qlin::orthogonalize(&raw);
        if exact_basis.len() != feasible.carrier.dim() {
            return Err(ProblemError::InvalidInput(
                "carrier basis is rationally dependent".into(),
            ));
        }
        let utility_float = utility.to_float();
        Ok(LocalProblem {
            id: id.into(),
            feasible,
            utility,
            utility_float,
            exact_basis,
            solutions: Vec::new(),
            value: None,
            certificate: None,
        })
    }

    pub fn carrier(&self) -> &Subspace {
        &self.feasible.carrier
    }

    pub fn ambient_dim(&self) -> usize {
        self.feasible.ambient_dim()
    }

    pub fn utility_float(&self) -> &FPoly {
        &self.utility_float
    }

    pub fn exact_basis(&self) -> &[QVec] {
        &self.exact_basis
    }

    pub fn is_solved(&self) -> bool {
        self.value.is_some()
    }

    /// Exact pullback of the utility along the (rational orthogonal) carrier
    /// basis: a polynomial in dim(carrier) scaled coordinates. Two utilities
    /// agree on the carrier iff their pullbacks through the *same* basis are
    /// identical, which is how all restriction-equality checks below use it.
    pub fn restrict_exact(&self, u: &QPoly) -> QPoly {
        u.restrict_to_span(&self.exact_basis)
    }

    /// Maximize the utility over the feasible set, filling `solutions`,
    /// `value`, and `certificate`.
    pub fn solve(&mut self) -> Result<&Certificate> {
        let sol = solve_local(&self.utility_float, &self.feasible)?;
        self.solutions = sol.points;
        self.value = Some(sol.value);
        self.certificate = Some(sol.certificate);
        Ok(self.certificate.as_ref().unwrap())
    }

    /// Re-verify the solved-problem invariants: every solution is feasible
    /// and attains the certified value within 1e-9.
    pub fn verify_solutions(&self) -> Result<()> {
        let value = self.value.ok_or_else(|| ProblemError::Unsolved(self.id.clone()))?;
        for s in &self.solutions {
            if !self.feasible.contains_ambient(s, MEMBER_TOL) {
                return Err(ProblemError::InvalidInput(format!(
                    "solution {s:?} of {} is not feasible",
                    self.id
                )));
            }
            let v = self.utility_float.eval_f64(&s.0);
            if (v - value).abs() > MEMBER_TOL {
                return Err(ProblemError::InvalidInput(format!(
                    "solution {s:?} of {} attains {v}, certificate says {value}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// The three conditions for an arrow source -> target: feasible-set
/// containment, equality of the restricted utilities on the source carrier,
/// and the dimension comparison.
#[derive(Debug, Clone, Serialize)]
pub struct MorphismWitness {
    pub source: String,
    pub target: String,
    pub containment: bool,
    pub restriction_equal: bool,
    pub dim_leq: bool,
}

impl MorphismWitness {
    pub fn exists(&self) -> bool {
        self.containment && self.restriction_equal && self.dim_leq
    }
}

pub fn check_morphism(source: &LocalProblem, target: &LocalProblem) -> Result<MorphismWitness> {
    if source.ambient_dim() != target.ambient_dim() {
        return Err(ProblemError::InvalidInput(
            "problems live in different ambient spaces".into(),
        ));
    }
    let containment = target.feasible.contains_set(&source.feasible, MEMBER_TOL)?;
    let restriction_equal =
        source.restrict_exact(&source.utility) == source.restrict_exact(&target.utility);
    let dim_leq = source.carrier().dim() <= target.carrier().dim();
    Ok(MorphismWitness {
        source: source.id.clone(),
        target: target.id.clone(),
        containment,
        restriction_equal,
        dim_leq,
    })
}

/// Outcome of intersecting two local problems.
#[derive(Debug)]
pub enum MeetResult {
    Problem(Box<LocalProblem>),
    /// Utilities disagree on the common carrier; `witness` is a point where
    /// the two restrictions differ.
    Incompatible { witness: Vector, reason: String },
}

/// Express `f`'s region in the coordinates of a subspace `m` of its carrier.
pub(crate) fn restrict_shape_to(f: &FeasibleSet, m: &Subspace) -> Result<Shape> {
    let dm = m.dim();
    // column c of w: f-carrier coordinates of m's c-th basis vector
    let w: Vec<Vec<f64>> = (0..dm)
        .map(|c| f.carrier.coords(&m.basis()[c]))
        .collect();
    let transform_rows = |a: &[Vec<f64>]| -> Vec<Vec<f64>> {
        a.iter()
            .map(|row| {
                (0..dm)
                    .map(|c| row.iter().zip(&w[c]).map(|(x, y)| x * y).sum())
                    .collect()
            })
            .collect()
    };
    match &f.shape {
        Shape::Box { lower, upper } => {
            let (a, b) = crate::space::box_rows(lower, upper);
            Ok(Shape::Polytope {
                a: transform_rows(&a),
                b,
            })
        }
        Shape::Polytope { a, b } => Ok(Shape::Polytope {
            a: transform_rows(a),
            b: b.clone(),
        }),
        Shape::Ball { center, radius } => {
            let c_amb = f.carrier.embed(center);
            let c_proj = m.project(&c_amb);
            let h = c_amb.dist(&c_proj);
            let r2 = radius * radius - h * h;
            if r2 < -MEMBER_TOL {
                return Err(ProblemError::EmptyIntersection);
            }
            Ok(Shape::Ball {
                center: m.coords(&c_proj),
                radius: r2.max(0.0).sqrt(),
            })
        }
    }
}

fn ball_contains_ball(c1: &[f64], r1: f64, c2: &[f64], r2: f64) -> bool {
    // does (c1, r1) contain (c2, r2)?
    let d = c1
        .iter()
        .zip(c2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    d + r2 <= r1 + MEMBER_TOL
}

fn intersect_shapes_on(m: &Subspace, sa: Shape, sb: Shape) -> Result<Shape> {
    match (sa, sb) {
        (Shape::Polytope { a: a1, b: b1 }, Shape::Polytope { a: a2, b: b2 }) => {
            let mut a = a1;
            let mut b = b1;
            a.extend(a2);
            b.extend(b2);
            Ok(Shape::Polytope { a, b })
        }
        (
            Shape::Ball {
                center: c1,
                radius: r1,
            },
            Shape::Ball {
                center: c2,
                radius: r2,
            },
        ) => {
            if ball_contains_ball(&c1, r1, &c2, r2) {
                Ok(Shape::Ball {
                    center: c2,
                    radius: r2,
                })
            } else if ball_contains_ball(&c2, r2, &c1, r1) {
                Ok(Shape::Ball {
                    center: c1,
                    radius: r1,
                })
            } else {
                Err(ProblemError::UnsupportedShapes(
                    "partially overlapping balls (neither contains the other)".into(),
                ))
            }
        }
        (ball @ Shape::Ball { .. }, poly @ Shape::Polytope { .. })
        | (poly @ Shape::Polytope { .. }, ball @ Shape::Ball { .. }) => {
            let (Shape::Ball { center, radius }, Shape::Polytope { a, b }) = (&ball, &poly)
            else {
                unreachable!()
            };
            // ball inside polytope: every halfspace clears the ball's reach
            let ball_inside = a.iter().zip(b).all(|(row, bi)| {
                let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                row.iter().zip(center).map(|(x, y)| x * y).sum::<f64>() + radius * norm
                    <= bi + MEMBER_TOL
            });
            if ball_inside {
                return Ok(ball);
            }
            // polytope inside ball: all vertices within the radius
            let verts = crate::space::polytope_vertices(a, b, m.dim())?;
            if verts.is_empty() {
                return Err(ProblemError::EmptyIntersection);
            }
            let poly_inside = verts.iter().all(|v| {
                v.iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    <= radius + MEMBER_TOL
            });
            if poly_inside {
                Ok(poly)
            } else {
                Err(ProblemError::UnsupportedShapes(
                    "ball/polytope intersection with neither containing the other".into(),
                ))
            }
        }
        _ => Err(ProblemError::UnsupportedShapes(
            "unexpected restricted shapes".into(),
        )),
    }
}

/// Exact rational basis of the intersection of the two carriers, if the
/// rational lane agrees with the floating-point dimension; the caller falls
/// back to float checks otherwise.
fn exact_meet_basis(a: &LocalProblem, b: &LocalProblem, want_dim: usize) -> Option<Vec<QVec>> {
    let n = a.ambient_dim();
    let raw = qlin::intersect_spans(a.exact_basis(), b.exact_basis(), n);
    let basis = qlin::orthogonalize(&raw);
    (basis.len() == want_dim).then_some(basis)
}

/// Find a point of the span of `basis` where `diff` (an ambient polynomial)
/// does not vanish. `diff` is nonzero on the span, so small deterministic
/// probes suffice.
fn nonvanishing_witness(diff: &QPoly, basis: &Subspace) -> Vector {
    let d = basis.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for attempt in 0..10_000 {
        let t: Vec<f64> = if attempt == 0 {
            vec![1.0; d]
        } else {
            (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()
        };
        let x = basis.embed(&t);
        let val = diff.to_float().eval_f64(&x.0);
        if val.abs() > 1e-9 {
            return x;
        }
    }
    basis.embed(&vec![0.0; d])
}

/// Intersect two local problems: common carrier, intersected feasible
/// region, and the shared restricted utility. Utilities that disagree on
/// the common carrier yield `MeetResult::Incompatible`.
pub fn meet(a: &LocalProblem, b: &LocalProblem) -> Result<MeetResult> {
    let m = intersect_subspaces(&[a.carrier().clone(), b.carrier().clone()])?;

    // utility compatibility on the common carrier
    let compatible = match exact_meet_basis(a, b, m.dim()) {
        Some(basis) => {
            a.utility.restrict_to_span(&basis) == b.utility.restrict_to_span(&basis)
        }
        None => {
            let fb: Vec<Vec<f64>> = m.basis().iter().map(|v| v.0.clone()).collect();
            crate::poly::poly_equal(
                &a.utility_float().restrict_to_span(&fb),
                &b.utility_float().restrict_to_span(&fb),
                MEMBER_TOL,
            )
        }
    };
    if !compatible {
        let diff = a.utility.sub(&b.utility);
        return Ok(MeetResult::Incompatible {
            witness: nonvanishing_witness(&diff, &m),
            reason: format!(
                "utilities of {} and {} disagree on the common carrier",
                a.id, b.id
            ),
        });
    }

    let feasible = if m.dim() == 0 {
        let origin = Vector::zeros(a.ambient_dim());
        if !a.feasible.contains_ambient(&origin, MEMBER_TOL)
            || !b.feasible.contains_ambient(&origin, MEMBER_TOL)
        {
            return Err(ProblemError::EmptyIntersection);
        }
        FeasibleSet::new(
            m,
            Shape::Box {
                lower: vec![],
                upper: vec![],
            },
        )
        .map_err(ProblemError::Space)?
    } else {
        let sa = restrict_shape_to(&a.feasible, &m)?;
        let sb = restrict_shape_to(&b.feasible, &m)?;
        let shape = intersect_shapes_on(&m, sa, sb)?;
        FeasibleSet::new(m, shape).map_err(|e| match e {
            SpaceError::EmptyFeasible => ProblemError::EmptyIntersection,
            other => ProblemError::Space(other),
        })?
    };

    let problem = LocalProblem::new(
        format!("{}_meet_{}", a.id, b.id),
        feasible,
        a.utility.clone(),
    )?;
    Ok(MeetResult::Problem(Box::new(problem)))
}

/// The union problem: the family itself plus the global argmax over the
/// union of the feasible sets (well-defined once all pairwise overlaps carry
/// the same restricted utility).
#[derive(Debug)]
pub struct StarProblem {
    pub problems: Vec<LocalProblem>,
    pub solutions: Vec<Vector>,
    pub value: f64,
}

#[derive(Debug)]
pub enum StarResult {
    Star(StarProblem),
    Incompatible {
        pair: (String, String),
        witness: Vector,
        reason: String,
    },
}

pub fn build_star(problems: &[LocalProblem]) -> Result<StarResult> {
    if problems.is_empty() {
        return Err(ProblemError::InvalidInput("empty problem family".into()));
    }
    for p in problems {
        if !p.is_solved() {
            return Err(ProblemError::Unsolved(p.id.clone()));
        }
    }
    // pairwise compatibility wherever the feasible sets intersect
    for i in 0..problems.len() {
        for j in i + 1..problems.len() {
            match meet(&problems[i], &problems[j]) {
                Ok(MeetResult::Problem(_)) => {}
                Ok(MeetResult::Incompatible { witness, reason }) => {
                    return Ok(StarResult::Incompatible {
                        pair: (problems[i].id.clone(), problems[j].id.clone()),
                        witness,
                        reason,
                    });
                }
                Err(ProblemError::EmptyIntersection) => {} // disjoint: nothing to agree on
                Err(ProblemError::UnsupportedShapes(_)) => {} // region unrepresentable; utilities already carrier-checked
                Err(e) => return Err(e),
            }
        }
    }
    let value = problems
        .iter()
        .map(|p| p.value.unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut solutions = Vec::new();
    for p in problems {
        if p.value.unwrap() >= value - MEMBER_TOL {
            solutions.extend(p.solutions.iter().cloned());
        }
    }
    let solutions = crate::space::dedup_points(solutions, MEMBER_TOL);
    Ok(StarResult::Star(StarProblem {
        problems: problems.to_vec(),
        solutions,
        value,
    }))
}

/// Does the closest-feasible projection of `x` land in the problem's
/// solution set?
pub fn in_f(x: &Vector, p: &LocalProblem) -> Result<bool> {
    if !p.is_solved() {
        return Err(ProblemError::Unsolved(p.id.clone()));
    }
    let projs = feasible_projection(x, &p.feasible)?;
    Ok(projs
        .iter()
        .any(|g| p.solutions.iter().any(|s| s.approx_eq(g, MEMBER_TOL))))
}

/// Closest points to `x` across the union of feasible sets (all problems
/// whose projection achieves the minimum distance, ties within 1e-9).
pub fn gamma_star(x: &Vector, problems: &[LocalProblem]) -> Result<Vec<Vector>> {
    let mut candidates: Vec<(f64, Vector)> = Vec::new();
    for p in problems {
        for g in feasible_projection(x, &p.feasible)? {
            candidates.push((x.dist(&g), g));
        }
    }
    let best = candidates
        .iter()
        .map(|(d, _)| *d)
        .fold(f64::INFINITY, f64::min);
    Ok(crate::space::dedup_points(
        candidates
            .into_iter()
            .filter(|(d, _)| *d <= best + MEMBER_TOL)
            .map(|(_, g)| g)
            .collect(),
        MEMBER_TOL,
    ))
}

pub fn in_f_star(x: &Vector, star: &StarProblem) -> Result<bool> {
    let gammas = gamma_star(x, &star.problems)?;
    Ok(gammas
        .iter()
        .any(|g| star.solutions.iter().any(|s| s.approx_eq(g, MEMBER_TOL))))
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub point: Vec<f64>,
    pub note: String,
}

/// Sample-check report, JSON-ready.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: String,
    pub counterexamples: Vec<Counterexample>,
    pub seed: u64,
    pub samples: usize,
    pub details: Vec<String>,
}

/// Draw a point of `f` by rejection from its bounding box.
pub fn sample_in_feasible(f: &FeasibleSet, rng: &mut impl Rng) -> Result<Vector> {
    let (lo, hi) = f.bounding_box()?;
    for _ in 0..10_000 {
        let t: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(l, u)| if u > l { rng.gen_range(*l..*u) } else { *l })
            .collect();
        if f.shape_contains(&t, 0.0) {
            return Ok(f.carrier.embed(&t));
        }
    }
    f.representative().map_err(ProblemError::Space)
}

fn in_box(x: &Vector, bounds: &Option<(Vec<f64>, Vec<f64>)>) -> bool {
    match bounds {
        None => true,
        Some((lo, hi)) => x
            .0
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(v, (l, u))| *v >= *l && *v <= *u),
    }
}

#[derive(Debug, Clone, Default)]
pub struct SampleOptions {
    pub samples: usize,
    pub seed: u64,
    /// Ambient box to clip samples to (e.g. a region of interest).
    pub sample_box: Option<(Vec<f64>, Vec<f64>)>,
    /// Extra deterministic probe points, checked before the random draws.
    pub extra_points: Vec<Vector>,
}

/// Membership monotonicity along a morphism source -> target: every sampled
/// point of the union domain with in_f(x, target) must satisfy
/// in_f(x, source). Random draws only, plus the caller's explicit probes.
pub fn check_presheaf(
    source: &LocalProblem,
    target: &LocalProblem,
    opts: &SampleOptions,
) -> Result<CheckReport> {
    let witness = check_morphism(source, target)?;
    if !witness.exists() {
        return Err(ProblemError::InvalidInput(format!(
            "no morphism {} -> {}: {witness:?}",
            source.id, target.id
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut counterexamples = Vec::new();
    let mut tested = 0usize;
    let pair = [source, target];
    let probe = |x: &Vector, counterexamples: &mut Vec<Counterexample>| -> Result<()> {
        if in_f(x, target)? && !in_f(x, source)? {
            counterexamples.push(Counterexample {
                point: x.0.clone(),
                note: format!("in F({}) but not in F({})", target.id, source.id),
            });
        }
        Ok(())
    };
    for x in &opts.extra_points {
        probe(x, &mut counterexamples)?;
        tested += 1;
    }
    let mut draws = 0usize;
    while draws < opts.samples {
        let p = pair[rng.gen_range(0..2)];
        let x = sample_in_feasible(&p.feasible, &mut rng)?;
        if !in_box(&x, &opts.sample_box) {
            continue;
        }
        draws += 1;
        tested += 1;
        if counterexamples.len() < 10 {
            probe(&x, &mut counterexamples)?;
        }
    }
    Ok(CheckReport {
        check: "presheaf".into(),
        verdict: if counterexamples.is_empty() {
            "pass".into()
        } else {
            "fail".into()
        },
        counterexamples,
        seed: opts.seed,
        samples: tested,
        details: vec![format!(
            "morphism {} -> {} verified before sampling",
            source.id, target.id
        )],
    })
}

/// Equalizer-style check for a compatible family: membership in the union
/// problem against the intersection of the local memberships, probed at the
/// local solutions, pairwise-meet solutions, and random union points.
pub fn check_gluing(
    problems: &[LocalProblem],
    opts: &SampleOptions,
) -> Result<CheckReport> {
    let star = match build_star(problems)? {
        StarResult::Star(s) => s,
        StarResult::Incompatible { pair, reason, .. } => {
            return Err(ProblemError::InvalidInput(format!(
                "incompatible family ({} / {}): {reason}",
                pair.0, pair.1
            )));
        }
    };
    // meets of all intersecting pairs, solved, both as probe sources and as
    // extra membership conditions on the intersection side
    let mut meets: Vec<LocalProblem> = Vec::new();
    for i in 0..problems.len() {
        for j in i + 1..problems.len() {
            match meet(&problems[i], &problems[j]) {
                Ok(MeetResult::Problem(mut m)) => {
                    m.solve()?;
                    meets.push(*m);
                }
                Ok(MeetResult::Incompatible { .. }) => unreachable!("star built"),
                Err(ProblemError::EmptyIntersection)
                | Err(ProblemError::UnsupportedShapes(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let mut counterexamples = Vec::new();
    let mut details = Vec::new();
    let mut tested = 0usize;
    let probe = |x: &Vector,
                     counterexamples: &mut Vec<Counterexample>|
     -> Result<()> {
        let in_star = in_f_star(x, &star)?;
        let mut in_all = true;
        for p in &star.problems {
            if !in_f(x, p)? {
                in_all = false;
                break;
            }
        }
        let mut in_meets = true;
        for m in &meets {
            if !in_f(x, m)? {
                in_meets = false;
                break;
            }
        }
        if in_star && !in_all {
            counterexamples.push(Counterexample {
                point: x.0.clone(),
                note: "in F(star) but not in every F(s_k)".into(),
            });
        }
        if in_all && in_meets && !in_star {
            counterexamples.push(Counterexample {
                point: x.0.clone(),
                note: "in every F(s_k) and all meet conditions, but not in F(star)".into(),
            });
        }
        Ok(())
    };

    // targeted probes
    let mut targets: Vec<Vector> = Vec::new();
    for p in problems {
        targets.extend(p.solutions.iter().cloned());
    }
    for m in &meets {
        targets.extend(m.solutions.iter().cloned());
        if let Ok(rep) = m.feasible.representative() {
            targets.push(rep);
        }
    }
    targets.extend(star.solutions.iter().cloned());
    targets.extend(opts.extra_points.iter().cloned());
    let targets = crate::space::dedup_points(targets, MEMBER_TOL);
    let targeted_total = targets.len();
    for x in &targets {
        if counterexamples.len() < 10 {
            probe(x, &mut counterexamples)?;
        }
        tested += 1;
    }
    let targeted_failures = counterexamples.len();

    // random union draws
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let mut draws = 0usize;
    let mut random_failures = 0usize;
    while draws < opts.samples {
        let p = &problems[rng.gen_range(0..problems.len())];
        let x = sample_in_feasible(&p.feasible, &mut rng)?;
        if !in_box(&x, &opts.sample_box) {
            continue;
        }
        draws += 1;
        tested += 1;
        let before = counterexamples.len();
        if counterexamples.len() < 10 {
            probe(&x, &mut counterexamples)?;
        }
        random_failures += counterexamples.len() - before;
    }
    details.push(format!(
        "targeted probes: {targeted_total} ({} violations)",
        targeted_failures
    ));
    details.push(format!(
        "random draws: {draws} ({random_failures} violations)"
    ));
    details.push(format!("union solutions: {:?}", star.solutions));
    Ok(CheckReport {
        check: "gluing".into(),
        verdict: if counterexamples.is_empty() {
            "pass".into()
        } else {
            "fail".into()
        },
        counterexamples,
        seed: opts.seed,
        samples: tested,
        details,
    })
}

/// Exact rationalization helper used by modules that take the float carrier
/// into the rational lane.
pub fn rationalize_vector(v: &Vector) -> QVec {
    v.0.iter().map(|&x| qlin::qfrom_f64(x)).collect()
}

pub fn rational_to_vector(v: &QVec) -> Vector {
    Vector(v.iter().map(qto_f64).collect())
}

/// Exact rational coordinates helper for tests and io.
pub fn qvec_from_i64(entries: &[i64]) -> QVec {
    entries
        .iter()
        .map(|&n| BigRational::from_integer(n.into()))
        .collect()
}
