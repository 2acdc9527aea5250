//! Time-one flows of degree-2 generators and composition of Hamiltonians
//! with them.

mod gauge;
mod generator;
mod map;
mod series;

pub use gauge::{GaugeMap, HermitianFamily};
pub use generator::{decompose, QuadraticGenerator};
pub use map::{compose, compose_maps, structure_matrix, time_one_map, write_l_fourier, write_map_dump, FlowMode, SymplecticMap};
pub use series::lie_series;

use crate::algebra::{AlgebraError, Monomial};
use crate::ode::OdeError;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum LieError {
    #[error("key {0:?} has weighted degree above 2")]
    Degree(Monomial),
    #[error("key {0:?} is not affine in y")]
    NotLinearInY(Monomial),
    #[error("grid of {points} points per angle cannot resolve cutoff {cutoff}")]
    GridTooCoarse { points: usize, cutoff: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("exact quadratic flow needs a y-independent generator")]
    YDependent,
    #[error("symplecticity defect {defect:e} at grid point {point}")]
    Symplecticity { defect: f64, point: usize },
    #[error("Lie series did not converge within {0} terms")]
    SeriesDiverged(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
