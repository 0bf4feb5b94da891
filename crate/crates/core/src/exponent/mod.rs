//! Shared numeric foundations used by every other module.

mod channel;
mod curve;
mod gain;
mod protocol;

pub use channel::{complex_normal, sample_channel, trial_rng, ChannelRealization, TrialRng};
pub use curve::{crossing_points, pointwise_max, pointwise_min, PiecewiseLinearCurve, CURVE_EPS};
pub use gain::{ExtendedReal, MultiplexingGain};
pub use protocol::{ProtocolKind, ProtocolSpec};
