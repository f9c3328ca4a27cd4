pub mod bounds;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod faddeeva;
pub mod ode;
pub mod params;
pub mod pulse;
pub mod quadrature;
pub mod roots;
pub mod spectral;
pub mod tomography;
pub mod units;

pub use error::{Error, Result};
