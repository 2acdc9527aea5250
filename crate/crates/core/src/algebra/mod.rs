//! Fourier-Taylor Hamiltonians, Poisson brackets and majorant norms.

mod bracket;
pub mod dump;
mod hamiltonian;
mod monomial;
mod norm;

pub use bracket::{poisson_bracket, poisson_bracket_cut, Discarded};
pub use hamiltonian::{is_normal_key, normal_form, AlgebraError, TaylorHamiltonian};
pub use monomial::Monomial;
pub use norm::*;
