//! Equivariant conformal minimal surfaces from Weierstrass data.

pub mod domain;
pub mod error;
pub mod linalg;
pub mod nullgeom;
pub mod periods;
pub mod sampling;
pub mod series;
pub mod solver;
pub mod surface;
pub mod symgroup;
pub mod wdata;

pub use error::{Error, Result};
