//! Machine verification of the classification of spaces of matrices with upper rank at most 2
//! over the two-element field.

pub mod catalog;
pub mod classifiers;
pub mod error;
pub mod genmatrix;
pub mod gf2;
pub mod orbits;
pub mod predicates;
pub mod spaces;

pub use error::{Error, Result};
pub use gf2::{Gf2Matrix, Gf2Poly, Gf2Vector, QuadForm};
pub use spaces::{AffineMatrixSpace, MatrixSpace, VectorSpaceF2};
