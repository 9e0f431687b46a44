//! Ball and cylinder clusters around the unit sphere.
//!
//! The crate builds the FCC/HCP/icosahedral ball clusters and their unlocking
//! moves, cylinder configurations given by tangent generatrices, the D3
//! unlocking family of the six-cylinder configuration and its record point,
//! the δ-process over dual pairs of Platonic solids, numerical second-order
//! rigidity certificates, and the C∞ "beak" counterexample.

pub mod balls;
pub mod cex;
pub mod cylinders;
pub mod geom3;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod platonic_sweep;
pub mod rigidity;
pub mod unlockd3;

mod radius;

pub use radius::Radius;

use thiserror::Error;

/// Crate-level error wrapping the per-module errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geom(#[from] geom3::GeomError),
    #[error(transparent)]
    Balls(#[from] balls::BallsError),
    #[error(transparent)]
    Cylinders(#[from] cylinders::CylinderError),
    #[error(transparent)]
    Unlock(#[from] unlockd3::UnlockError),
    #[error(transparent)]
    Sweep(#[from] platonic_sweep::SweepError),
    #[error(transparent)]
    Rigidity(#[from] rigidity::RigidityError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
