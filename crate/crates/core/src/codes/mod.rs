//! Explicit space-time codes for the relay protocols, exhaustive ML
//! decoding and word-error simulation.

mod codebook;
mod constellation;
mod decode;
mod embedding;
mod relay;
mod schedule;
mod simulate;

pub use codebook::{cda_codeword, naf_codebook, naf_forwards, oaf_diagonal_codebook, CodeKind, Codebook, Forward};
pub use constellation::Constellation;
pub use decode::ml_decode;
pub use embedding::{build_embedding, NumberFieldEmbedding};
pub use relay::{oaf_relay_matrices, relay_matrices};
pub use schedule::{cubic_cda_codeword, nsdf_schedule, NsdfSchedule, CUBIC_GAMMA};
pub use simulate::{effective_channel, simulate_wer};
