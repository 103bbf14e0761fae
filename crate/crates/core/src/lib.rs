//! Exact classification of corank-one map-germs as Morin singularities.
//!
//! Germs are represented by truncated Taylor jets with rational
//! coefficients. [`classify::morin_classify`] decides whether a germ is
//! `r`-Morin from the vector `Λ` cutting out its singular set and the null
//! vector field `η`; [`isotopy`] computes the sign invariant separating
//! isotopy classes and explicit reductions between them; [`ruling`] treats
//! maps swept out by one-parameter families of planes.

pub mod classify;
pub mod error;
pub mod forms;
pub mod germ;
pub mod isotopy;
pub mod jet;
pub mod matrix;
pub mod parse;
pub mod rat;
pub mod report;
pub mod ruling;

pub use error::{Error, Result};
pub use germ::{LambdaData, MapJet};
pub use jet::{Jet, Monomial};
pub use matrix::RatMatrix;
pub use rat::Rat;
