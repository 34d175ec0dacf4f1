//! Compactly supported functions on the product group and on its quotient by
//! the diagonal `GL_n`, stored as formal sums of coset indicators.

pub mod reps;
pub mod solver;
pub mod eval;
pub mod sum;

pub use eval::{lattice_multiplicities, volume_h, x_equal, Comparison, EvalConfig};
pub use reps::{coset_reps, subgroup_index};
pub use solver::{solve, Mode, SolverConfig};
pub use sum::{CosetSum, HeckeTerm, Piece, Space, Term};
