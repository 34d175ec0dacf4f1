//! The spherical Hecke algebra of `GL_n x GL_{n+1} x F^x`, its Satake
//! transform, and its action on invariant functions on the quotient.
//!
//! Satake convention: for the indicator of `K w^lam K` in `GL_m`,
//! `Sat = sum_a c(lam, a) l^{-<a, rho>} X^a`, where `c(lam, a)` counts the
//! cosets `n N(O)`, `n` upper unipotent, with `w^a n in K w^lam K`, and
//! `<a, rho> = sum_i (m + 1 - 2i) a_i / 2`. With this twist the image of
//! `1[K diag(w, 1) K]` is `l^{1/2} (B1 + B2)`.

mod algebra;
mod cosets;
mod operators;

pub use algebra::{is_symmetric, HeckeElt, Label, SatakeConfig};
pub use cosets::{double_coset_reps, double_coset_size};
pub use operators::{ell_operator, euler_factor, euler_factor_from_satake, l_factor_polynomial, u_operator};
