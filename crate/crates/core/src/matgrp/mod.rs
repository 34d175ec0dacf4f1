//! Matrices over the local field, the group `GL_n x GL_{n+1} x F^x`, its
//! compact open subgroups and the elements used by the norm relations.

pub mod group;
pub mod matrix;
pub mod normal_forms;
pub mod subgroup;

pub use group::{
    embed_big, embed_delta_tilde, embed_scalar, long_weyl, phi, tau, tau_pow, xi_open_orbit, GroupElt,
};
pub use matrix::Mat;
pub use normal_forms::{hnf_right, hnf_right_prec, iwasawa, iwasawa_prec, smith_normal_form, Hnf, Iwasawa};
pub use subgroup::{gl_fraction, j_volume, Pattern, SubgroupDesc};
