//! Density-evolution and (G)EXIT analysis for joint decoding of correlated
//! sources over independent noisy channels.
//!
//! The crate computes belief-propagation and MAP-bound thresholds, EBP
//! (G)EXIT curves, and achievable-channel-parameter regions for punctured
//! LDPC ensembles — uncoupled and spatially coupled — plus a 2-user Gaussian
//! multiple-access variant. Everything is asymptotic (density evolution);
//! no finite-length simulation.
//!
//! Organization:
//! - [`ensembles`]: degree distributions, puncturing fraction, coupled specs.
//! - [`densities`]: the L-density algebra (exact erasure mixtures and a
//!   quantized grid form), channel families, entropy/error/GEXIT functionals.
//! - [`sources`]: correlation models and the correlation-node density map.
//! - [`joint_de`]: the uncoupled joint-decoder DE and threshold searches.
//! - [`exit_analysis`]: EBP EXIT/GEXIT curves and area-theorem MAP bounds.
//! - [`spatial_coupling`]: the (l,r,L,w) coupled DE and coupled curves.
//! - [`regions`]: Slepian-Wolf regions and DE-computed achievable regions.
//! - [`mac`]: the Gaussian MAC function node and its DE.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! only switches float intrinsics and implements `std::error::Error`.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]

extern crate alloc;

use alloc::string::String;

pub mod densities;
pub mod ensembles;
pub mod exit_analysis;
pub mod joint_de;
pub mod mac;
pub(crate) mod math;
pub mod regions;
pub mod sources;
pub mod spatial_coupling;

pub use math::h2;

/// Errors produced by construction and search operations.
///
/// Numerical non-convergence inside density evolution is not an error (it is
/// a result); errors are reserved for invalid inputs and searches that cannot
/// produce an answer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A degree distribution or coupled spec violates its invariants.
    InvalidEnsemble {
        /// Which part was rejected ("lambda", "rho", "coupled").
        part: &'static str,
        /// Why.
        reason: &'static str,
    },
    /// The ensemble's mother code has rate <= 0, so it cannot be punctured.
    NotPuncturable,
    /// A spec string did not parse.
    ParseSpec {
        /// Which kind of spec ("ensemble", "source", "channel", ...).
        kind: &'static str,
        /// The offending input.
        input: String,
    },
    /// A scalar parameter is outside its documented range.
    InvalidParameter(String),
    /// Threshold bisection found the same outcome at both bracket endpoints.
    NoThresholdInRange,
    /// The (G)EXIT curve ended before the target area was accumulated.
    CurveTruncated,
    /// channel_from_entropy was asked for an entropy the family cannot reach.
    EntropyOutOfRange,
}

impl Error {
    pub(crate) fn invalid_ensemble(part: &'static str, reason: &'static str) -> Self {
        Error::InvalidEnsemble { part, reason }
    }
    pub(crate) fn parse_spec(kind: &'static str, input: &str) -> Self {
        Error::ParseSpec {
            kind,
            input: String::from(input),
        }
    }
    pub(crate) fn invalid_parameter(msg: &str) -> Self {
        Error::InvalidParameter(String::from(msg))
    }
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::InvalidEnsemble { part, reason } => {
                write!(f, "invalid ensemble ({part}): {reason}")
            }
            Error::NotPuncturable => {
                write!(f, "ensemble not puncturable: mother-code rate is not positive")
            }
            Error::ParseSpec { kind, input } => write!(f, "cannot parse {kind} spec {input:?}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NoThresholdInRange => write!(f, "no threshold in range"),
            Error::CurveTruncated => write!(f, "curve truncated"),
            Error::EntropyOutOfRange => write!(f, "entropy outside the attainable range"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
