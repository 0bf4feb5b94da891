//! Diversity-multiplexing tradeoff (DMT) toolkit for cooperative relay
//! protocols: orthogonal amplify-and-forward (OAF), non-orthogonal and
//! orthogonal selection decode-and-forward (NSDF / OSDF, fixed and variable
//! phase ratio) and non-orthogonal amplify-and-forward (NAF).
//!
//! The crate is organised in layers:
//!
//! * [`exponent`]: shared numeric foundations: multiplexing gains, protocol
//!   descriptions, counter-based channel sampling and piecewise-linear curves.
//! * [`analytic`]: closed-form DMT curves and optimal phase ratios.
//! * [`numeric`]: an independent oracle that re-derives every curve by
//!   exactly solving the underlying outage-exponent infimum problems.
//! * [`outage`]: finite-SNR Monte Carlo outage estimation and slope fits.
//! * [`codes`]: explicit space-time codes, ML decoding and word-error
//!   simulation.

pub mod analytic;
pub mod codes;
mod error;
pub mod exponent;
pub mod numeric;
pub mod outage;
pub mod report;

pub use error::{Error, Result};
pub use exponent::{
    sample_channel, ChannelRealization, ExtendedReal, MultiplexingGain, PiecewiseLinearCurve, ProtocolKind,
    ProtocolSpec,
};
