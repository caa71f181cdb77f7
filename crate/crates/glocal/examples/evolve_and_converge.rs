//! Growing a surrogate one observation at a time.
//!
//! Starting from the two-axes state, a diagonal slice arrives: the partition
//! refines, the family degree is re-derived (and must stay within one of the
//! old degree), and the old reconstruction is carried onto the finer
//! partition, where it must survive as an exactly-continuous member that
//! agrees with the old assembly away from the new carrier. Duplicates are
//! detected and change nothing; contradictory data is rejected outright.
//!
//! The second half runs the convergence harness: feeding a covering sequence
//! of slices of one true utility drives the reported maximizer onto the true
//! argmax, while a sequence that never covers it exhausts its budget and
//! says so.
//!
//! Run with: cargo run --example evolve_and_converge

use glocal::poly::{demo_utility, qpoly, QPoly};
use glocal::problems::LocalProblem;
use glocal::space::{FeasibleSet, Shape, Subspace, Vector};
use glocal::surrogate::{build_state, convergence_run, evolve, BuildOptions, SurrogateError};

fn v(coords: &[f64]) -> Vector {
    Vector(coords.to_vec())
}

fn axis_problem(id: &str, axis: usize, u: QPoly) -> LocalProblem {
    let mut b = vec![0.0, 0.0];
    b[axis] = 1.0;
    let feasible = FeasibleSet::new(
        Subspace::new(2, &[v(&b)]).unwrap(),
        Shape::Box {
            lower: vec![0.0],
            upper: vec![1.0],
        },
    )
    .unwrap();
    let mut p = LocalProblem::new(id, feasible, u).unwrap();
    p.solve().unwrap();
    p
}

fn axis_x() -> LocalProblem {
    axis_problem("ax", 0, qpoly(2, &[(3, &[0, 0]), (1, &[1, 0]), (-1, &[2, 0])]))
}

fn axis_y() -> LocalProblem {
    axis_problem("ay", 1, qpoly(2, &[(3, &[0, 0]), (2, &[0, 1]), (-1, &[0, 2])]))
}

/// The diagonal span{(1,1)} clipped to 0 <= t <= 1.2 in carrier coordinates,
/// seeing the full utility U(x, y) = 3 + x + 2y - x^2 - y^2.
fn diagonal() -> LocalProblem {
    let feasible = FeasibleSet::new(
        Subspace::new(2, &[v(&[1.0, 1.0])]).unwrap(),
        Shape::Box {
            lower: vec![0.0],
            upper: vec![1.2],
        },
    )
    .unwrap();
    let mut p = LocalProblem::new("diag", feasible, demo_utility()).unwrap();
    p.solve().unwrap();
    p
}

fn main() {
    let opts = BuildOptions::default();
    let state = build_state(vec![axis_x(), axis_y()], &opts).unwrap();
    println!(
        "initial state: lambda = {}, r = {}, best maximum {:?} -> {}",
        state.partition.lambda(),
        state.r,
        state.maximal_elements[0].0,
        state.maximal_values[0]
    );
    assert_eq!(state.partition.lambda(), 4);
    assert_eq!(state.r, 2);

    // --- refine with the diagonal slice -------------------------------------
    let (next, report) = evolve(&state, diagonal(), &opts).unwrap();
    println!(
        "\nafter the diagonal arrives: lambda {} -> {}, r {} -> {} (growth bound ok: {})",
        report.lambda_before,
        report.lambda_after,
        report.r_before,
        report.r_after,
        report.degree_growth_ok
    );
    println!(
        "stability: {} off-carrier samples, max residual {:e}, carried member exactly continuous: {}",
        report.stability_samples, report.stability_max_residual, report.stability_member_exact
    );
    assert!(!report.duplicate);
    // the diagonal adds one pure class: 4 classes become 5
    assert_eq!(report.lambda_before, 4);
    assert_eq!(report.lambda_after, 5);
    // the refined degree stays within {r, r+1}; here it does not move at all
    assert!(report.degree_growth_ok);
    assert_eq!(report.r_after, 2);
    // the old assembly, carried onto the finer partition, is still an exactly
    // continuous member and agrees with the old values off the new carrier
    assert!(report.stability_member_exact);
    assert_eq!(report.stability_samples, 1000);
    assert!(report.stability_max_residual <= 1e-9);

    // the diagonal slice hosts the new best maximum: U(3/4, 3/4) = 33/8
    println!(
        "new best maximum {:?} -> {}",
        next.maximal_elements[0].0, next.maximal_values[0]
    );
    assert_eq!(next.mu(), 1);
    assert!(next.maximal_elements[0].approx_eq(&v(&[0.75, 0.75]), 1e-9));
    assert!((next.maximal_values[0] - 4.125).abs() <= 1e-9);
    assert!(next.interpolant.is_some());

    // --- a duplicate observation is a no-op ---------------------------------
    let again = axis_problem("ax_again", 0, qpoly(2, &[(3, &[0, 0]), (1, &[1, 0]), (-1, &[2, 0])]));
    let (unchanged, report) = evolve(&state, again, &opts).unwrap();
    println!(
        "\nduplicate slice: detected = {}, family size stays {}",
        report.duplicate,
        unchanged.problems.len()
    );
    assert!(report.duplicate);
    assert_eq!(unchanged.problems.len(), 2);

    // --- contradictory data is rejected --------------------------------------
    // A problem on the x-axis claiming the utility is x (not 3 + x - x^2)
    // disagrees with the family on a shared carrier.
    let clash = axis_problem("clash", 0, qpoly(2, &[(1, &[1, 0])]));
    match evolve(&state, clash, &opts) {
        Err(SurrogateError::Incompatible { with, reason }) => {
            println!("conflicting slice rejected (against {with}): {reason}");
            assert_eq!(with, "ax");
        }
        other => panic!("expected an incompatibility, got {other:?}"),
    }

    // === convergence harness ==================================================
    // True utility U with argmax (1/2, 1); the sequence of slices is the
    // x-axis, the y-axis, then the full unit box, which covers the argmax.
    let full_box = {
        let feasible = FeasibleSet::new(
            Subspace::full(2),
            Shape::Box {
                lower: vec![0.0, 0.0],
                upper: vec![1.0, 1.0],
            },
        )
        .unwrap();
        let mut p = LocalProblem::new("box", feasible, demo_utility()).unwrap();
        p.solve().unwrap();
        p
    };
    let report = convergence_run(
        &demo_utility(),
        vec![axis_x(), axis_y(), full_box],
        9,
        &opts,
    )
    .unwrap();
    println!("\ncovering sequence: true argmax {:?}", report.true_argmax);
    for step in &report.steps {
        println!(
            "  after slice {}: distance to true argmax {:.3} (r = {}, lambda = {}, tau = {})",
            step.m, step.distance, step.r, step.lambda, step.tau
        );
    }
    assert_eq!(report.true_argmax, vec![0.5, 1.0]);
    // the box is the third slice (index 2) and contains the argmax
    assert_eq!(report.covering_index, Some(2));
    assert!(report.converged && !report.budget_exhausted);
    assert!((report.steps[0].distance - 1.0).abs() <= 1e-9);
    assert!((report.steps[1].distance - 0.5).abs() <= 1e-9);
    assert!(report.steps[2].distance <= 1e-6);
    println!("csv:\n{}", report.to_csv());

    // without the box the argmax is never covered: the run keeps the budget
    // honest instead of pretending to converge
    let stalled = convergence_run(&demo_utility(), vec![axis_x(), axis_y()], 9, &opts).unwrap();
    println!(
        "axes only: covering_index {:?}, converged {}, notes {:?}",
        stalled.covering_index, stalled.converged, stalled.notes
    );
    assert_eq!(stalled.covering_index, None);
    assert!(!stalled.converged && stalled.budget_exhausted);
    assert!((stalled.steps[1].distance - 0.5).abs() <= 1e-9);

    println!("\nevolution and convergence invariants hold");
}
