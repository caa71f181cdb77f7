//! Local problems as a diagram: morphisms, meets, the star problem, and
//! seeded sample checks of the membership laws.
//!
//! The running family is a segment inside a triangle. The segment
//! [0,1] x {0} carries the utility x; the triangle x + y <= 1, x, y >= 0
//! carries x + 2y, which restricts to x on the segment — so the inclusion is
//! a morphism of problems, and the two solved problems assemble into a star
//! problem whose solution set is the best local argmax.
//!
//! The sample checks are deliberately honest: membership monotonicity holds
//! at every random draw, while the equalizer-style gluing check surfaces the
//! one boundary point where the naive inclusion genuinely fails.
//!
//! Run with: cargo run --example sheaf_checks

use glocal::poly::qpoly;
use glocal::problems::{
    build_star, check_gluing, check_morphism, check_presheaf, gamma_star, in_f, in_f_star, meet,
    LocalProblem, MeetResult, SampleOptions, StarResult,
};
use glocal::space::{FeasibleSet, Shape, Subspace, Vector};

fn v(coords: &[f64]) -> Vector {
    Vector(coords.to_vec())
}

/// Segment [0,1] x {0} maximizing x.
fn segment() -> LocalProblem {
    let feasible = FeasibleSet::new(
        Subspace::new(2, &[v(&[1.0, 0.0])]).unwrap(),
        Shape::Box {
            lower: vec![0.0],
            upper: vec![1.0],
        },
    )
    .unwrap();
    let mut p = LocalProblem::new("seg", feasible, qpoly(2, &[(1, &[1, 0])])).unwrap();
    p.solve().unwrap();
    p
}

/// Triangle x + y <= 1, x >= 0, y >= 0 maximizing x + 2y.
fn triangle() -> LocalProblem {
    let feasible = FeasibleSet::new(
        Subspace::full(2),
        Shape::Polytope {
            a: vec![vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
            b: vec![1.0, 0.0, 0.0],
        },
    )
    .unwrap();
    let mut p = LocalProblem::new("tri", feasible, qpoly(2, &[(1, &[1, 0]), (2, &[0, 1])])).unwrap();
    p.solve().unwrap();
    p
}

fn main() {
    let seg = segment();
    let tri = triangle();
    println!(
        "seg: argmax {:?} value {}\ntri: argmax {:?} value {}",
        seg.solutions[0].0,
        seg.value.unwrap(),
        tri.solutions[0].0,
        tri.value.unwrap()
    );
    assert!(seg.solutions[0].approx_eq(&v(&[1.0, 0.0]), 1e-9));
    assert!(tri.solutions[0].approx_eq(&v(&[0.0, 1.0]), 1e-9));

    // --- morphism: the inclusion seg -> tri --------------------------------
    let witness = check_morphism(&seg, &tri).unwrap();
    println!(
        "\nseg -> tri: containment {}  restriction_equal {}  dim_leq {}  => morphism {}",
        witness.containment,
        witness.restriction_equal,
        witness.dim_leq,
        witness.exists()
    );
    assert!(witness.exists());
    // no morphism the other way: the triangle does not fit in the segment
    assert!(!check_morphism(&tri, &seg).unwrap().exists());

    // --- meet: the shared part of the two problems -------------------------
    let MeetResult::Problem(common) = meet(&seg, &tri).unwrap() else {
        panic!("utilities agree on the overlap, the meet must exist");
    };
    println!(
        "meet(seg, tri): carrier dim {}, contains (1/2, 0): {}",
        common.carrier().dim(),
        common.feasible.contains_ambient(&v(&[0.5, 0.0]), 1e-9)
    );
    assert_eq!(common.carrier().dim(), 1);

    // a rescaled utility on the same segment disagrees at interior points
    let mut rescaled =
        LocalProblem::new("seg_double", seg.feasible.clone(), qpoly(2, &[(2, &[1, 0])])).unwrap();
    rescaled.solve().unwrap();
    let MeetResult::Incompatible { witness, reason } = meet(&seg, &rescaled).unwrap() else {
        panic!("x and 2x differ on the segment");
    };
    println!("meet(seg, seg_double): incompatible at {:?} ({reason})", witness.0);

    // --- star problem: the family glued over its overlaps -------------------
    let StarResult::Star(star) = build_star(&[seg.clone(), tri.clone()]).unwrap() else {
        panic!("the compatible pair must form a star");
    };
    println!(
        "\nstar: value {}  solutions {:?}",
        star.value,
        star.solutions.iter().map(|s| s.0.clone()).collect::<Vec<_>>()
    );
    // the triangle's peak beats the segment's: the star keeps only (0, 1)
    assert_eq!(star.solutions.len(), 1);
    assert!(star.solutions[0].approx_eq(&v(&[0.0, 1.0]), 1e-9));
    assert!((star.value - 2.0).abs() <= 1e-9);

    // --- membership predicates ----------------------------------------------
    // in_f: does the closest feasible point of x solve the problem?
    assert!(in_f(&v(&[2.0, 0.0]), &seg).unwrap()); // retracts to (1, 0)
    assert!(!in_f(&v(&[0.0, 0.0]), &seg).unwrap()); // retracts to itself
    // gamma_star: closest points across the union of feasible sets
    let closest = gamma_star(&v(&[-1.0, 2.0]), &star.problems).unwrap();
    println!(
        "closest union points to (-1, 2): {:?}",
        closest.iter().map(|s| s.0.clone()).collect::<Vec<_>>()
    );
    assert!(closest.iter().all(|g| g.approx_eq(&v(&[0.0, 1.0]), 1e-9)));
    // in_f_star ties both together: (-1, 2) retracts onto the star solution
    assert!(in_f_star(&v(&[-1.0, 2.0]), &star).unwrap());
    assert!(!in_f_star(&v(&[0.5, -1.0]), &star).unwrap()); // retracts to (1/2, 0)

    // --- seeded sample checks ------------------------------------------------
    // Membership monotonicity along the morphism: any sampled union point
    // whose retraction solves the big problem must also solve the small one.
    // Random draws come from the union of the feasible sets, clipped to the
    // box; (1, 0) and (0, 0) are deterministic probes, both vacuous here.
    let opts = SampleOptions {
        samples: 10_000,
        seed: 2718,
        sample_box: Some((vec![-2.0, -2.0], vec![2.0, 2.0])),
        extra_points: vec![v(&[1.0, 0.0]), v(&[0.0, 0.0])],
    };
    let report = check_presheaf(&seg, &tri, &opts).unwrap();
    println!(
        "\npresheaf check: {} over {} samples (seed {}), {} counterexamples",
        report.verdict,
        report.samples,
        report.seed,
        report.counterexamples.len()
    );
    assert_eq!(report.verdict, "pass");
    assert!(report.samples >= 10_000);

    // The gluing check probes harder: solutions, meet solutions, and the
    // star's own solutions. It is honest about the one genuine failure — the
    // union argmax (0, 1) retracts onto the segment at (0, 0), which does not
    // solve the segment problem, so "in F(star) implies in every F(s_k)"
    // breaks exactly there. Random union draws never see that boundary point.
    let report = check_gluing(&[seg, tri], &opts).unwrap();
    println!(
        "gluing check: {} — counterexamples {:?}",
        report.verdict,
        report
            .counterexamples
            .iter()
            .map(|c| (c.point.clone(), c.note.clone()))
            .collect::<Vec<_>>()
    );
    for line in &report.details {
        println!("  {line}");
    }
    assert_eq!(report.verdict, "fail");
    assert_eq!(report.counterexamples.len(), 1);
    assert!(v(&report.counterexamples[0].point.clone()).approx_eq(&v(&[0.0, 1.0]), 1e-9));
    assert!(report
        .details
        .iter()
        .any(|d| d.starts_with("random") && d.contains("(0 violations)")));

    println!("\ndiagram laws verified (including the honest boundary failure)");
}
