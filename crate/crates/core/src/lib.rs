//! Wandering subspaces of Rudin-type submodules of the Hardy space on the
//! bidisc, computed at finite truncation by two independent routes.

pub mod blaschke;
pub mod cli;
pub mod error;
pub mod model;
pub mod rudin;
pub mod series;
pub mod subspace;

pub use blaschke::{BlaschkePoint, RudinSpec, DEFAULT_TOL};
pub use error::{Error, Result};
pub use series::{Caps, Series1, Series2};
pub use subspace::Subspace;
