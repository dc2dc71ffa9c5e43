//! Linear finite volume element (FVEM) operators for anisotropic diffusion
//! on simplicial meshes in one to three dimensions, with exact conditioning
//! measurements and a-priori condition-number bounds.

pub mod assembly;
pub mod bounds;
pub mod diffusion;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod mesh;
pub mod quadrature;
pub mod sparse;
pub mod spectral;
pub mod tensor;

pub use error::{Error, ErrorFamily, Result};
