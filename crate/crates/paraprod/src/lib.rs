//! Numerical harmonic analysis on the periodic torus: frequency localization
//! operators, weighted symbol calculus, BMO-type norm estimators, bilinear
//! paraproducts and Coifman-Meyer / Kato-Ponce multipliers, together with an
//! experiment harness that checks the associated boundedness properties
//! empirically at desk scale.

pub mod bilinear;
pub mod bumps;
pub mod config;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod field;
pub mod io;
pub mod norms;
pub mod oracles;
mod par;
pub mod report;
pub mod scale;
pub mod sigma;
pub mod weights;

pub use error::{Error, Result};
pub use field::{GridSpec, SampledField, Spectrum};
pub use scale::ScaleGrid;
