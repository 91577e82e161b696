//! Pseudo-hyperbolic Gauss maps of Lorentzian surfaces and hypersurfaces in
//! anti-de Sitter space: indefinite linear algebra, exterior algebra, Cartan
//! frames of null curves, a catalog of closed-form immersions, the
//! Laplace–Beltrami operator on Lorentzian charts and a finite-type classifier.

pub mod curve_frames;
pub mod error;
pub mod gauss_type;
pub mod geometry_engine;
pub mod multivector;
pub mod pseudo_linear;
pub mod surface_catalog;

pub use error::{GeomError, Result};
