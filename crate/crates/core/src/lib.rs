//! Exact computations with Siegel modular forms of small degree.
//!
//! The crate covers half-integral matrices and their GL-classes and genera,
//! theta series and genus theta series, Siegel–Eisenstein Fourier
//! coefficients, primitive and rank-filtered coefficients, mod `p^m`
//! singularity, and fitting p-adic limits of Eisenstein series by genus
//! theta series on a finite window.
//!
//! All arithmetic is exact: coefficients are arbitrary-precision rationals and
//! every predicate that would quantify over a full Fourier expansion is
//! evaluated on an explicit trace-bounded window.

pub mod eisenstein;
pub mod error;
pub mod exactnum;
pub mod fourier;
pub mod genus;
pub mod lambda;
pub mod padic;
pub mod theta;

pub use error::{Error, Result};
pub use exactnum::{ExtendedValuation, QuadCharacter, Rational};
pub use fourier::QExpansion;
pub use genus::{ClassRecord, GenusRecord};
pub use lambda::HalfIntegralMatrix;
pub use padic::{VerificationReport, WeightSequence, WeightTarget};




