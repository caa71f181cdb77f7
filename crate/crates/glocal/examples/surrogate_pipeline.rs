//! The full surrogate pipeline, stage by stage: partition the ambient space
//! along the carriers, read the boundary incidences off the partition, let
//! the hosted maxima pick the family degree, compute the continuity kernel,
//! interpolate the local data, and maximize the reconstruction.
//!
//! Two families drive the tour. The two-axes family (one problem per
//! coordinate axis of the plane) exercises every stage with dyadic data; a
//! pair of planes in R^3 whose shared line hosts three tied maxima shows the
//! degree law climbing above the quadratic floor and forcing one shared
//! piece of degree six.
//!
//! Run with: cargo run --example surrogate_pipeline

use glocal::arrangement::{build_incidence, build_partition, ClassKind};
use glocal::poly::{qpoly, QPoly};
use glocal::problems::LocalProblem;
use glocal::space::{FeasibleSet, Shape, Subspace, Vector};
use glocal::surrogate::{
    build_state, canonical_pieces, choose_degree, continuity_system, hosted_maxima, kernel_basis,
    BuildOptions,
};

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

/// A coordinate plane of R^3 spanned by the x-axis and one transverse axis,
/// carrying -x^6 + 2x^4 - x^2 - t^2: a W-shaped profile along x with three
/// tied maxima at x in {-1, 0, 1}, falling off in the transverse direction.
fn w_plane(id: &str, transverse: usize) -> LocalProblem {
    let mut b2 = vec![0.0; 3];
    b2[transverse] = 1.0;
    let feasible = FeasibleSet::new(
        Subspace::new(3, &[v(&[1.0, 0.0, 0.0]), v(&b2)]).unwrap(),
        Shape::Box {
            lower: vec![-2.0, -2.0],
            upper: vec![2.0, 2.0],
        },
    )
    .unwrap();
    let mut tsq = vec![0u32; 3];
    tsq[transverse] = 2;
    let terms: Vec<(i64, &[u32])> = vec![
        (-1, &[6, 0, 0]),
        (2, &[4, 0, 0]),
        (-1, &[2, 0, 0]),
        (-1, tsq.as_slice()),
    ];
    let mut p = LocalProblem::new(id, feasible, qpoly(3, &terms)).unwrap();
    p.solve().unwrap();
    p
}

fn main() {
    // === Part 1: the two-axes family ========================================
    // Each axis sees its own slice of U(x, y) = 3 + x + 2y - x^2 - y^2.
    let problems = vec![
        axis_problem("ax", 0, qpoly(2, &[(3, &[0, 0]), (1, &[1, 0]), (-1, &[2, 0])])),
        axis_problem("ay", 1, qpoly(2, &[(3, &[0, 0]), (2, &[0, 1]), (-1, &[0, 2])])),
    ];

    // --- stage 1: partition the plane along the carriers -------------------
    let carriers: Vec<Subspace> = problems.iter().map(|p| p.carrier().clone()).collect();
    let partition = build_partition(&carriers).unwrap();
    println!("partition of R^2 by the two axes (lambda = {}):", partition.lambda());
    for (i, class) in partition.classes.iter().enumerate() {
        println!(
            "  class {i}: {:?}, dim {}, label {:?}",
            class.kind,
            class.dim(),
            class.label
        );
    }
    assert_eq!(partition.lambda(), 4); // x-axis, y-axis, origin, complement
    assert_eq!(partition.classes[2].kind, ClassKind::Intersection);
    assert_eq!(partition.complement_index(), Some(3));
    // the smallest carrier containing a point names its class
    assert_eq!(partition.class_of(&v(&[0.5, 0.0]), 1e-9), 0);
    assert_eq!(partition.class_of(&v(&[0.0, 0.0]), 1e-9), 2);
    assert_eq!(partition.class_of(&v(&[0.3, 0.7]), 1e-9), 3);

    // --- stage 2: boundary incidences ---------------------------------------
    let incidence = build_incidence(&partition);
    println!("\nincidence rows (hi over lo), tau = {}:", incidence.tau());
    for row in &incidence.rows {
        println!("  class {} meets class {} at the latter's carrier", row.hi, row.lo);
    }
    // each axis sits over the origin; the complement sits over each axis
    assert_eq!(incidence.tau(), 4);

    // --- stage 3: the degree law --------------------------------------------
    // One maximum per class here, so the law floors at the quadratic degree.
    let r = choose_degree(&problems, &partition).unwrap();
    println!("\ndegree law picks r = {r}");
    assert_eq!(r, 2);

    // --- stage 4: continuity kernel ------------------------------------------
    // Unknowns: one polynomial of degree <= 2 per class (6 coefficients each);
    // the boundary conditions cut the 24 down to a 17-dimensional kernel.
    let system = continuity_system(&partition, &incidence, r);
    let basis = kernel_basis(&system).unwrap();
    println!(
        "continuity system: {} unknowns, rank {}, kernel dimension {}",
        system.unknowns(),
        system.rank(),
        basis.len()
    );
    assert_eq!(system.unknowns(), 24);
    assert_eq!(basis.len(), 17);
    assert_eq!(system.rank(), 24 - 17);
    for member in &basis {
        assert!(member.continuity_exact(&partition, &incidence));
    }

    // --- stage 5: the canonical interpolant ----------------------------------
    let f = canonical_pieces(&problems, &partition, &incidence, r, None, 64).unwrap();
    println!("\ncanonical pieces:");
    for (i, piece) in f.pieces.iter().enumerate() {
        println!("  class {i}: {piece}");
    }
    // the pure classes extend their local quadratics; the origin keeps the
    // shared value 3; the complement is fitted for continuity
    assert_eq!(
        f.pieces[0],
        qpoly(2, &[(3, &[0, 0]), (1, &[1, 0]), (-1, &[2, 0]), (-1, &[0, 2])])
    );
    assert_eq!(
        f.pieces[1],
        qpoly(2, &[(3, &[0, 0]), (2, &[0, 1]), (-1, &[0, 2]), (-1, &[2, 0])])
    );
    assert_eq!(f.pieces[2], qpoly(2, &[(3, &[0, 0])]));
    assert!(f.continuity_exact(&partition, &incidence));
    assert!(f.continuity_residual(&partition, &incidence, 100, 11) <= 1e-9);

    // --- stage 6: end-to-end state and maximization ---------------------------
    let state = build_state(problems, &BuildOptions::default()).unwrap();
    println!(
        "\nassembled state: r = {}, kernel dim = {}, mu = {} maximal element(s)",
        state.r,
        state.kernel_basis.len(),
        state.mu()
    );
    for flag in &state.flags {
        println!("  flag: {flag}");
    }
    assert_eq!(state.mu(), 1);
    assert!(state.maximal_elements[0].approx_eq(&v(&[0.0, 1.0]), 1e-9));
    assert!((state.maximal_values[0] - 4.0).abs() <= 1e-9);
    assert!(state.interpolant.is_some());
    // evaluating the reconstruction across the classes
    let recon = state.reconstruction();
    assert!((recon.eval(&state.partition, &v(&[0.5, 0.0])) - 3.25).abs() <= 1e-12);
    assert!((recon.eval(&state.partition, &v(&[0.0, 1.0])) - 4.0).abs() <= 1e-12);
    assert!((recon.eval(&state.partition, &v(&[0.0, 0.0])) - 3.0).abs() <= 1e-12);
    // Off the carriers the complement piece is only a continuity device: the
    // local data says nothing there, so its cross term comes from a seeded
    // least-squares fit against nearest-carrier values. Where that fitted
    // piece overshoots the carrier maxima, the state flags it — and its
    // winner stays out of the maximal element set (mu counts carriers only).
    let off = recon.eval(&state.partition, &v(&[0.5, 0.5]));
    println!("reconstruction at (1/2, 1/2) = {off:.6} (unseen true utility there: 4)");
    assert!((off - 4.0).abs() <= 0.5, "the fitted piece stays near the data");
    assert!(state
        .flags
        .iter()
        .any(|f| f.contains("complement piece exceeds the carrier maxima")));

    // === Part 2: cohosted maxima push the degree up ==========================
    let planes = vec![w_plane("pxy", 1), w_plane("pxz", 2)];
    let carriers: Vec<Subspace> = planes.iter().map(|p| p.carrier().clone()).collect();
    let partition = build_partition(&carriers).unwrap();
    let incidence = build_incidence(&partition);
    println!(
        "\ntwo planes in R^3: lambda = {}, tau = {}",
        partition.lambda(),
        incidence.tau()
    );

    // each plane problem has three tied argmaxima, all on the shared x-axis
    assert_eq!(planes[0].solutions.len(), 3);
    let hosted = hosted_maxima(&planes, &partition).unwrap();
    let shared = partition
        .classes
        .iter()
        .position(|c| c.kind == ClassKind::Intersection)
        .unwrap();
    println!(
        "class {shared} (the shared x-axis) hosts {} maxima:",
        hosted[shared].len()
    );
    for m in &hosted[shared] {
        println!("  {:?} with value {}", m.point.0, m.value);
    }
    assert_eq!(hosted[shared].len(), 3);

    // three collinear maxima on one class: the degree law must go to 3
    let r = choose_degree(&planes, &partition).unwrap();
    println!("degree law picks r = {r}");
    assert_eq!(r, 3);

    // the interpolant glues the three maxima with a single shared sextic
    let f = canonical_pieces(&planes, &partition, &incidence, r, None, 27).unwrap();
    let sextic = qpoly(
        3,
        &[
            (-1, &[6, 0, 0]),
            (2, &[4, 0, 0]),
            (-1, &[2, 0, 0]),
            (-1, &[0, 2, 0]),
            (-1, &[0, 0, 2]),
        ],
    );
    println!("shared piece on every carrier class: {}", f.pieces[0]);
    assert_eq!(f.degree, 6);
    assert_eq!(f.pieces[0], sextic);
    assert_eq!(f.pieces[1], sextic);
    assert_eq!(f.pieces[2], sextic);
    assert!(f.continuity_exact(&partition, &incidence));

    println!("\npipeline invariants hold for both families");
}
