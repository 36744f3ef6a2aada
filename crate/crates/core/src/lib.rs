//! Föppl–von Kármán plates with wedge disclinations, discretised by a C0
//! interior-penalty discontinuous Galerkin method on cubic Lagrange
//! triangles.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: disc triangulations, Gmsh import/export, edge topology
//! * [`element`]: the cubic reference element and quadrature
//! * [`space`]: the constrained global space, dofs and point evaluation
//! * [`forms`]: the discrete functional, residual and exact Jacobian
//! * [`solver`]: sparse direct and Krylov solves, Newton and continuation
//! * [`analytic`]: closed-form reference solutions
//! * [`post`]: energies, curvature, stresses, profiles and exports
//! * [`experiments`]: the verification and parametric study drivers
//!
//! The `fvk` binary exposes the drivers on the command line.

pub mod analytic;
pub mod element;
pub mod error;
pub mod experiments;
pub mod forms;
pub mod geom;
pub mod mesh;
pub mod post;
pub mod solver;
pub mod space;
pub mod sparse;

pub use error::{FvkError, Result};
