//! Desk-scale workbench for computational operator theory on dense complex
//! matrices: spectra and numerical ranges, spectral measures and functional
//! calculus, Riesz/Dunford decompositions with invariant-subspace extraction,
//! GNS representations of finite-dimensional *-algebras, and convolution
//! algebras of measures on finite equivalence relations.

pub mod convalg;
pub mod error;
pub mod jordan;
pub mod jsonfmt;
pub mod linop;
pub mod qspace;
pub mod speccalc;
pub mod states;

pub use error::{Error, Result};
pub use linop::{ComplexMatrix, EigenCluster, Subspace, Tolerances, MAX_DIM};
pub use num_complex::Complex64;
