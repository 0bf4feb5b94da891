use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::ProtocolSpec;

/// Random stream owned by a single Monte Carlo trial.
pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for trial `trial_index` under `master_seed`.
///
/// The stream is a pure function of the two integers, so trials can be
/// evaluated in any order on any number of threads.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> TrialRng {
    let key = splitmix64(master_seed ^ splitmix64(trial_index.wrapping_add(0x517c_c1b7_2722_0a95)));
    ChaCha8Rng::seed_from_u64(key)
}

/// One quasi-static draw of the fading coefficients.
///
/// `g[0]` is source→destination, `g[1..]` source→relay; `h[j]` is the
/// destination link of the relay fed by `g[j + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub g: Vec<Complex64>,
    pub h: Vec<Complex64>,
}

impl ChannelRealization {
    /// Draws `n` source links and `n - 1` relay links, each `CN(0, 1)`.
    pub fn draw<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = (0..n).map(|_| complex_normal(rng)).collect();
        let h = (0..n.saturating_sub(1)).map(|_| complex_normal(rng)).collect();
        ChannelRealization { g, h }
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn is_finite(&self) -> bool {
        self.g.iter().chain(&self.h).all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Circularly symmetric `CN(0, 1)`: independent real and imaginary parts of
/// variance 1/2.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn sample_channel(spec: &ProtocolSpec, trial_index: u64, master_seed: u64) -> ChannelRealization {
    let mut rng = trial_rng(master_seed, trial_index);
    ChannelRealization::draw(spec.n, &mut rng)
}
