//! Seeded random streams, Rayleigh flat-fading channels and AWGN.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::ComplexMatrix;
use crate::{Error, Result};

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the generator seed for substream `stream_id` of `seed`.
pub fn substream_seed(seed: u64, stream_id: u64) -> u64 {
    mix64(seed ^ mix64(stream_id.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Reproducible random source; one per worker or simulation chunk.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
    channels_drawn: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RandomStream {
            seed,
            stream_id,
            rng: ChaCha8Rng::seed_from_u64(substream_seed(seed, stream_id)),
            channels_drawn: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// One CN(0, variance) sample.
    #[inline]
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let sd = (variance / 2.0).sqrt();
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re * sd, im * sd)
    }

    /// `count` independent equiprobable bits, one per entry.
    pub fn bits(&mut self, count: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let word: u64 = self.rng.random();
            let take = (count - out.len()).min(64);
            out.extend((0..take).map(|b| ((word >> b) & 1) as u8));
        }
        out
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}

/// One channel matrix and its position in the stream's draw sequence.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub draw_index: u64,
}

/// `n_rx x m_tx` matrix of iid CN(0, 1) entries.
///
/// # Panics
/// If either dimension is zero.
pub fn draw_channel(rng: &mut RandomStream, n_rx: usize, m_tx: usize) -> ChannelRealization {
    let mut h = ComplexMatrix::zeros(n_rx, m_tx);
    for i in 0..n_rx {
        for j in 0..m_tx {
            h[(i, j)] = rng.complex_gaussian(1.0);
        }
    }
    let draw_index = rng.channels_drawn;
    rng.channels_drawn += 1;
    ChannelRealization { h, draw_index }
}

/// Adds CN(0, sigma2) noise to every entry of `y`.
pub fn add_noise(y: &[Complex64], sigma2: f64, rng: &mut RandomStream) -> Result<Vec<Complex64>> {
    let mut out = y.to_vec();
    add_noise_in_place(&mut out, sigma2, rng)?;
    Ok(out)
}

pub fn add_noise_in_place(y: &mut [Complex64], sigma2: f64, rng: &mut RandomStream) -> Result<()> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::invalid(format!("noise variance must be finite and >= 0, got {sigma2}")));
    }
    if sigma2 == 0.0 {
        return Ok(());
    }
    for z in y.iter_mut() {
        *z += rng.complex_gaussian(sigma2);
    }
    Ok(())
}
