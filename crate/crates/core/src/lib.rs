//! Determinantal point processes on bounded windows: correlation and
//! interaction kernels, Nyström operators and Fredholm determinants,
//! Papangelou intensities as determinant ratios, exact and birth-death
//! samplers, determinant inequalities, and Boolean-model clustering.

pub mod error;
pub mod gof;
pub mod kernels;
pub mod linalg;
pub mod matrix_ineq;
pub mod operators;
pub mod percolation;
pub mod quadrature;
pub mod renewal;
pub mod rng;
pub mod samplers;
pub mod space;
pub mod stats;

pub use error::{DppError, Result};
pub use kernels::{KernelSpec, Modulation, Profile, RenewalClosedForms};
pub use operators::{DiscretizedOperator, LocalInteraction, Which};
pub use quadrature::Quadrature;
pub use samplers::SampleBatch;
pub use space::{Configuration, Point, Window};
