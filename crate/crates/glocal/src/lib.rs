//! Reconstruct global optima from local ones.
//!
//! A *local problem* is a utility function together with a compact convex
//! feasible region living inside a subspace of the ambient space. This crate
//! provides:
//!
//! - exact and floating-point linear algebra over subspaces ([`qlin`],
//!   [`space`]);
//! - sparse multivariate polynomials over `f64` and exact rationals
//!   ([`poly`]);
//! - local concave maximization with certificates ([`solver`]);
//! - the category of local problems: morphisms, meets, and the
//!   consistency checks that decide when local solutions are fragments of a
//!   single global one ([`problems`]);
//! - gluing of local solutions into a global candidate by intersecting
//!   solution-slice constraints ([`glue`]);
//! - the subspace arrangement induced by the local carriers, its partition
//!   into classes and the incidence structure between them
//!   ([`arrangement`]);
//! - piecewise polynomial surrogates built on that partition: degree
//!   selection, continuity kernels, assembly, maximization, evolution under
//!   new local data, and convergence experiments ([`surrogate`]);
//! - a Groebner-basis engine for submodules of free modules over a
//!   polynomial ring, used to cross-check the continuity kernels
//!   ([`groebner`]);
//! - JSON/CSV input and output plus the command surface used by the `glocal`
//!   binary ([`io`], [`cli`]).
//!
//! See the `examples/` directory for end-to-end walkthroughs of each
//! capability.

pub mod arrangement;
pub mod cli;
pub mod glue;
pub mod io;
pub mod groebner;
pub mod poly;
pub mod problems;
pub mod qlin;
pub mod solver;
pub mod space;
pub mod surrogate;
