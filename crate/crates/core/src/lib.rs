//! Thermodynamic formalism toolkit: pressure, equilibrium states and phase
//! transitions for finite Markov shifts, renewal-type countable shifts and
//! a few interval maps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod exec;
pub mod fit;
pub mod interval;
pub mod renewal;
pub mod rpf;
pub mod sequences;
pub mod series;
pub mod symbolic;

pub use error::{Error, Result};
pub use exec::Exec;
