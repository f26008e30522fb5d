//! Integrators shared by the special-function and dynamics modules.

pub mod dop853;
pub(crate) mod taylor;

pub use dop853::{Control, Dop853, Outcome};
