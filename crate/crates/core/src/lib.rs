//! Numerical machinery for the superdiffusive semilinear heat equation
//! ∂ₜ^α u = Δu + κ₁|∇u|^q + κ₂|u|^{ρ-1}u, 1 < α < 2, on a periodic box.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod mlf;
pub mod norms;
pub mod quad;
pub mod solver;
pub mod spectral;
pub mod verify;
