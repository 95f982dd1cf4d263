//! Finite models for higher-order Fourier analysis: Gowers norms, phase polynomials,
//! cocycles on finite systems, cube measures and filtered abelian groups.

pub mod abelian;
pub mod cube;
pub mod error;
pub mod filtered;
pub mod gowers;
pub mod integration;
pub mod inverse;
pub mod io;
pub mod phase_poly;
pub mod systems;
pub mod target;
pub mod towers;

pub use abelian::{Character, FinAbGroup, GroupElem, Subgroup, TorusValue};
pub use error::{Error, Result};
pub use gowers::ComplexFunction;
pub use systems::{Cocycle, GammaSystem};
pub use target::{GroupValuedFunction, TableFn, Target, Torus, TorusFunction};
