pub mod cosetfun;
pub mod error;
pub mod hecke;
pub mod intrep;
pub mod localfield;
pub mod matgrp;
pub mod normrel;
pub mod scalars;
pub mod whittaker;

pub use error::{Error, Result};
pub use localfield::{FieldElement, LocalSet, Tri};
pub use scalars::{Monomial, Scalar, Var};
