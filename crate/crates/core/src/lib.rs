//! Third-order integrals of separable two-dimensional Hamiltonians.

pub mod catalog;
pub mod detsolve;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod implicit;
pub mod jet;
pub mod ode;
pub mod phasecore;
pub mod quad;
pub mod specfun;

pub use dual::Dual2;
pub use error::{Error, Result};
pub use jet::Jet;
pub use phasecore::{
    eval_f_polynomials, eval_integral_classical, poisson_bracket_residual, CoeffTensor, CorrectionFields,
    DerivStack, ParamSet, PhaseState, Potential1D, SeparablePotential, ThirdOrderIntegral, MONOMIALS,
};
