//! Recover a global argmax from one-dimensional slices.
//!
//! Two local problems see the utility U(x, y) = 3 + x + 2y - x^2 - y^2 only
//! along a coordinate axis. Each is solved on its own; gluing intersects the
//! affine preimages `solution + carrier^perp` and lands on the global peak,
//! and the certificate records the hypotheses (orthogonal carriers spanning
//! the plane, separable, strictly concave) that make that a theorem rather
//! than luck.
//!
//! Run with: cargo run --example concave_gluing

use glocal::glue::{certify_glue, check_separability, glue, GlueStatus};
use glocal::poly::{demo_utility, qpoly, QPoly};
use glocal::problems::LocalProblem;
use glocal::space::{FeasibleSet, Shape, Subspace, Vector};

/// The utility restricted to `[lo, hi]` on one coordinate axis of R^n.
fn axis_problem(id: &str, n: usize, axis: usize, lo: f64, hi: f64, u: QPoly) -> LocalProblem {
    let mut direction = vec![0.0; n];
    direction[axis] = 1.0;
    let feasible = FeasibleSet::new(
        Subspace::new(n, &[Vector(direction)]).unwrap(),
        Shape::Box {
            lower: vec![lo],
            upper: vec![hi],
        },
    )
    .unwrap();
    let mut p = LocalProblem::new(id, feasible, u).unwrap();
    p.solve().unwrap();
    p
}

fn main() {
    let u = demo_utility(); // 3 + x + 2y - x^2 - y^2, peak at (1/2, 1)

    // --- solve the two slices independently -------------------------------
    let px = axis_problem("x_axis", 2, 0, 0.0, 1.0, u.clone());
    let py = axis_problem("y_axis", 2, 1, 0.0, 1.0, u.clone());
    for p in [&px, &py] {
        let cert = p.certificate.as_ref().unwrap();
        println!(
            "{:7}  argmax {:?}  value {}  method {:?}  strictly_concave {}",
            p.id, p.solutions[0].0, p.value.unwrap(), cert.method, cert.strictly_concave
        );
        p.verify_solutions().unwrap();
    }
    // on the x-axis the restriction 3 + x - x^2 peaks at x = 1/2 ...
    assert_eq!(px.solutions[0].0, vec![0.5, 0.0]);
    assert_eq!(px.value, Some(3.25));
    // ... and on the y-axis 3 + 2y - y^2 peaks at the endpoint y = 1
    assert_eq!(py.solutions[0].0, vec![0.0, 1.0]);
    assert_eq!(py.value, Some(4.0));

    // --- glue: intersect solution + carrier^perp --------------------------
    let glued = glue(&[px.clone(), py.clone()]).unwrap();
    println!(
        "\nglued point {:?}  status {:?}  residual {:e}  ({} equations, rank {})",
        glued.point.0, glued.status, glued.residual, glued.equations, glued.rank
    );
    assert_eq!(glued.status, GlueStatus::ExactPoint);
    assert_eq!(glued.point.0, vec![0.5, 1.0]); // dyadic data: exact in f64
    assert!(glued.residual <= 1e-12);
    assert!(glued.quality.iter().all(|d| *d <= 1e-12));

    // --- certify the hypotheses that make the glued point the argmax ------
    let cert = certify_glue(&[px.clone(), py.clone()], &u).unwrap();
    println!(
        "certificate: direct_sum {}  separable {}  strictly_concave {} (exact {})  => certified {}",
        cert.direct_sum, cert.separable, cert.strictly_concave, cert.concavity_exact, cert.certified
    );
    assert!(cert.certified);

    // the certified point really is the global argmax: the unconstrained
    // peak (1/2, 1) lies in the product of the feasible intervals
    let grad = [
        u.to_float().partial(0).eval_f64(&glued.point.0),
        u.to_float().partial(1).eval_f64(&glued.point.0),
    ];
    println!("gradient at the glued point: {grad:?} (unconstrained peak)");
    assert!(grad.iter().all(|g| g.abs() <= 1e-12));

    // --- what breaks the certificate ---------------------------------------
    // A cross term -xy couples the axes: blocks no longer separate.
    let coupled = u.sub(&qpoly(2, &[(1, &[1, 1])]));
    let axes = [px.carrier().clone(), py.carrier().clone()];
    let sep = check_separability(&coupled, &axes).unwrap();
    println!(
        "\nwith a -xy cross term: separable {}  (max mixed coefficient {:.3})",
        sep.separable, sep.max_mixed
    );
    assert!(!sep.separable);
    let broken = certify_glue(&[px.clone(), py.clone()], &coupled).unwrap();
    assert!(!broken.certified);

    // A single slice leaves a degree of freedom: gluing reports the whole
    // affine solution set instead of a point.
    let partial = glue(std::slice::from_ref(&px)).unwrap();
    println!(
        "one slice only: status {:?}, solution set is {}-dimensional",
        partial.status,
        partial.affine.as_ref().unwrap().directions.dim()
    );
    assert_eq!(partial.status, GlueStatus::Underdetermined);

    // Two problems pinning different points on the same carrier contradict
    // each other; the report carries the least-squares witness.
    let mut clash = px.clone();
    clash.id = "x_axis_shifted".into();
    clash.solutions = vec![Vector(vec![0.25, 0.0])];
    let conflict = glue(&[px, clash]).unwrap();
    println!(
        "conflicting pins: status {:?}, witness x = {}, residual {}",
        conflict.status, conflict.point.0[0], conflict.residual
    );
    assert_eq!(conflict.status, GlueStatus::Inconsistent);
    assert!((conflict.point.0[0] - 0.375).abs() <= 1e-9);

    // --- the same story in R^3 with interior maxima ------------------------
    // u3 = 3 - (x - 1/4)^2 - (y - 1/2)^2 - (z - 3/4)^2: gluing the three
    // axis slices recovers the componentwise argmax.
    let u3 = qpoly(
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
    let slices: Vec<LocalProblem> = (0..3)
        .map(|axis| axis_problem(&format!("e{axis}"), 3, axis, 0.0, 1.0, u3.clone()))
        .collect();
    let g3 = glue(&slices).unwrap();
    println!("\nthree axes in R^3 glue to {:?}", g3.point.0);
    assert!(g3.point.approx_eq(&Vector(vec![0.25, 0.5, 0.75]), 1e-9));
    assert!(certify_glue(&slices, &u3).unwrap().certified);

    println!("\nall gluing invariants hold");
}
