//! Twisting elements and the norm-relation verifications, with their
//! reports.

mod constructions;
pub(crate) mod report;
mod suites;
mod tame;
mod wild;

pub use constructions::{delta_prime, delta_prime_1, delta_t, projection_fibres, stabilizer_volume_by_counting};
pub use report::{CheckConfig, Status, VerificationReport};
pub use suites::{birch_check, ell_op_check, euler_factor_check, lemma21_check, satake_check};
pub use tame::{integrality_check, prop45_check, tame_check};
pub use wild::{stab_factor_check, wild_check};
