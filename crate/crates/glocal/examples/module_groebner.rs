//! Gröbner bases for submodules of P^λ, and the bridge from boundary
//! constraints to the continuity kernel.
//!
//! First a small completion by hand: two generators of a submodule of
//! Q[x,y]^2 under the position-over-term order leave one S-vector that does
//! not reduce to zero, so Buchberger adds a third element; afterwards every
//! S-vector reduces to zero and division by the basis is a canonical (and
//! idempotent) normal form.
//!
//! Then the same machinery computes continuity kernels symbolically: the
//! boundary conditions of the two-axes partition become restrict-then-sign
//! constraint rows, the kernel of that system is a finitely generated
//! submodule, and its degree-2 slice spans exactly the kernel the linear
//! algebra finds coefficient-wise.
//!
//! Run with: cargo run --example module_groebner

use glocal::arrangement::{build_incidence, build_partition};
use glocal::groebner::{
    apply_t, buchberger, buchberger_certificate, degree_slice_span, kernel_generators, reduce,
    s_vector, ModuleElement, ModuleOrder,
};
use glocal::poly::{monomials_up_to, qpoly};
use glocal::qlin::QMat;
use glocal::space::{Subspace, Vector};
use glocal::surrogate::{continuity_system, kernel_basis, piecewise_to_vector, t_rows};

fn v(coords: &[f64]) -> Vector {
    Vector(coords.to_vec())
}

fn main() {
    // === Part 1: completing a basis ==========================================
    // Generators of a submodule of Q[x,y]^2:
    //   g1 = x e0 + y e1,  g2 = y e0 + x e1
    let g1 = ModuleElement::new(vec![qpoly(2, &[(1, &[1, 0])]), qpoly(2, &[(1, &[0, 1])])]).unwrap();
    let g2 = ModuleElement::new(vec![qpoly(2, &[(1, &[0, 1])]), qpoly(2, &[(1, &[1, 0])])]).unwrap();
    let ord = ModuleOrder::POT_GREVLEX;
    println!("generators:\n  g1 = {g1}\n  g2 = {g2}");

    // both lead in position 0, so they have an S-vector there; it lands
    // entirely in position 1 and nothing in {g1, g2} can reduce it
    let s = s_vector(&g1, &g2, &ord).unwrap().expect("same-position leads");
    let remainder = reduce(&s, &[g1.clone(), g2.clone()], &ord);
    println!("S(g1, g2) = {s}  reduces to  {remainder}");
    assert!(!remainder.is_zero(), "the pair alone is not a basis");
    assert!(!buchberger_certificate(&[g1.clone(), g2.clone()], &ord));

    // Buchberger closes the gap with exactly that missing element
    let basis = buchberger(&[g1.clone(), g2.clone()], &ord).unwrap();
    println!("\ncompleted basis ({} elements):", basis.len());
    for b in &basis {
        println!("  {b}");
    }
    assert_eq!(basis.len(), 3);
    assert!(buchberger_certificate(&basis, &ord));

    // division by a completed basis is a canonical normal form: reducing a
    // reduced element changes nothing, and members reduce to zero
    let f = ModuleElement::new(vec![qpoly(2, &[(1, &[2, 0])]), qpoly(2, &[])]).unwrap(); // x^2 e0
    let r1 = reduce(&f, &basis, &ord);
    let r2 = reduce(&r1, &basis, &ord);
    println!("\nreduce(x^2 e0) = {r1}  (stable under re-reduction: {})", r1 == r2);
    assert_eq!(r1, r2);
    let member = g1.sub_scaled(&g2, &glocal::poly::Monomial(vec![1, 0]), &glocal::qlin::qone());
    assert!(reduce(&member, &basis, &ord).is_zero(), "members normalize to zero");

    // === Part 2: the continuity kernel as a module ===========================
    // The two-axes partition of the plane: classes for the x-axis, y-axis,
    // origin, and complement, with four boundary incidences.
    let carriers = [
        Subspace::new(2, &[v(&[1.0, 0.0])]).unwrap(),
        Subspace::new(2, &[v(&[0.0, 1.0])]).unwrap(),
    ];
    let partition = build_partition(&carriers).unwrap();
    let incidence = build_incidence(&partition);
    let lambda = partition.lambda();
    println!("\ntwo-axes partition: lambda = {lambda}, tau = {}", incidence.tau());

    // each incidence row says: the difference of the two adjacent pieces
    // vanishes on the boundary carrier
    let rows = t_rows(&partition, &incidence);
    assert_eq!(rows.len(), 4);

    // a finite generating set for { f in P^4 : T f = 0 }, found by syzygy
    // elimination, each generator annihilated by T symbolically
    let gens = kernel_generators(lambda, 2, &rows, &ModuleOrder::TOP_GREVLEX).unwrap();
    println!("kernel generators: {} module elements", gens.len());
    for g in &gens {
        assert!(
            apply_t(&rows, g).iter().all(|p| p.is_zero()),
            "T must annihilate every generator"
        );
    }

    // the degree-2 slice of that submodule, as coefficient vectors
    let slice = degree_slice_span(&gens, lambda, 2, 2).unwrap();

    // the same kernel, computed by plain linear algebra on coefficients
    let system = continuity_system(&partition, &incidence, 2);
    let piecewise = kernel_basis(&system).unwrap();
    let monos = monomials_up_to(2, 2);
    let coeff_rows: Vec<_> = piecewise.iter().map(|f| piecewise_to_vector(f, &monos)).collect();

    // both descriptions span the same 17-dimensional space
    let slice_rank = QMat::from_rows(slice.clone()).rank();
    let kernel_rank = QMat::from_rows(coeff_rows.clone()).rank();
    let mut stacked = coeff_rows;
    stacked.extend(slice);
    let joint_rank = QMat::from_rows(stacked).rank();
    println!(
        "degree-2 slice rank {slice_rank}, coefficient kernel rank {kernel_rank}, joint rank {joint_rank}"
    );
    assert_eq!(slice_rank, 17);
    assert_eq!(kernel_rank, 17);
    assert_eq!(joint_rank, 17, "the module slice and the linear kernel coincide");

    println!("\nmodule computations agree with the coefficient-level kernel");
}
