//! Exact computation of extension groups, cohomology, and Yoneda products
//! of twisted tautological objects on Hilbert schemes of points on a
//! surface, from user-supplied Ext data of the underlying surface.
//!
//! The closed formulas are evaluated in exact rational arithmetic and every
//! one of them is cross-checked against an independent brute-force route:
//! representation averaging for symmetric-power dimensions, sign-identity
//! enumeration for the equivariant complex, and a component-model
//! composition engine for the Yoneda product.

pub mod complex;
pub mod context;
pub mod equivariant;
pub mod graded;
pub mod hilbert;
pub mod linalg;
pub mod reps;
pub mod signs;
pub mod verify;
pub mod yoneda;

pub use linalg::{Matrix, Rat};
