pub mod agm;
pub mod bits;
pub mod error;
pub mod quadrature;
pub mod theta;
pub mod hyperelliptic;
pub mod json;
pub mod thomae;
pub mod calabi_yau;
pub mod genus2;
pub mod verify;

pub use nalgebra;
pub use num_complex;
