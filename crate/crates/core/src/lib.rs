//! Numerical KAM reducibility for quasi-periodically forced harmonic
//! oscillators and the related nonlinear Schrodinger normal-form machinery.

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod algebra;
pub mod divisors;
pub mod grid;
pub mod hermite;
pub mod homological;
pub mod kam;
pub mod lie;
pub mod linalg;
pub mod nls;
pub mod ode;
pub mod output;
pub mod reducibility;
pub mod scalar;
pub mod variational;

/// `f64` instantiations of the generic types.
pub type Complex64 = scalar::C<f64>;
pub type Matrix = linalg::CMat<f64>;
pub type Basis = hermite::SpectralBasis<f64>;
pub type Frequencies = divisors::FrequencySet<f64>;
pub type Hamiltonian = algebra::TaylorHamiltonian<f64>;
pub type KamConfig = kam::KamConfig<f64>;
pub type KamResult = kam::KamResult<f64>;
pub type Potential = reducibility::QuasiPeriodicPotential<f64>;
pub type ReduceConfig = reducibility::ReduceConfig<f64>;
pub type Reduction = reducibility::ReducibilityResult<f64>;
pub type NlsConfig = nls::NlsConfig<f64>;
pub type NlsRunReport = nls::NlsRunReport<f64>;
pub type PotentialFamily = nls::PotentialFamily<f64>;
pub type GalerkinFamily = nls::GalerkinFamily<f64>;
pub type VariationalProblem = variational::VariationalProblem<f64>;
pub type Minimizer = variational::Minimizer<f64>;
