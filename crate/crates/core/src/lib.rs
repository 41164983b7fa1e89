//! Intersection cohomology of circle-fibered stratified spaces, computed over
//! exact rationals from finite perverse algebra models of their orbit spaces.
//!
//! The library works with a coordinate model of the controlled-forms algebra
//! of an orbit space (basis, degrees, per-stratum perverse degrees,
//! differential, products) together with a closed Euler 2-cochain. From that
//! data it extracts the perverse subcomplexes, builds the twisted pair
//! complex of the fibration with its wedge and differential, assembles the
//! short and long exact (Gysin) sequences with the connecting map carrying
//! the Euler class, and runs the cohomological comparison of two fibrations
//! over a common orbit space: an optimal base isomorphism with proportional
//! Euler classes is upgraded to an explicit, fully verified isomorphism of
//! perverse cochain algebras.

pub mod cdga;
pub mod classification;
pub mod cohomology;
pub mod error;
pub mod gysin;
pub mod linalg;
pub mod models;
pub mod perverse_forms;
pub mod strata;
pub mod testkit;

pub use cdga::{BasisDecl, Cochain, PerverseDegree, PerverseModel, ValidationReport};
pub use cohomology::{Class, CohomologyTable, GradedSubspace};
pub use error::{Error, Result};
pub use gysin::{GysinModel, GysinSequence, GysinTerm, IOmegaComplex, LemmaGReport};
pub use strata::{Nature, Perversity, StrataPoset, StratumId, StratumInfo};
