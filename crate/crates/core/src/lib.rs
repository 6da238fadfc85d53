//! Numerics for Besov spaces with power weights on the real line.
//!
//! Two characterizations are implemented: Littlewood-Paley blocks
//! ([`littlewood_paley`]) and ball means of differences ([`differences`]).
//! Both produce a [`diagnostics::SummandSequence`] whose tail decides whether
//! the quasi-norm is finite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
pub mod diagnostics;
pub mod differences;
pub mod error;
pub mod grid;
pub mod littlewood_paley;
pub mod numerics;
pub mod params;
pub mod quadrature;
pub mod scalar;
pub mod suites;
pub mod testfns;
pub mod weighted_lp;

pub use error::{Error, Result};
pub use params::{LogParams, SpaceParams, Q};
pub use scalar::Real;
