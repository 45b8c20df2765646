//! Offline per-realization modulation-set selection.
//!
//! With the channel and noise level known, each candidate set is scored by its
//! nearest-neighbour estimate of the expected number of bit errors in the
//! channel use, and the lowest score wins. For a Gray-labelled grid a symbol
//! error to a nearest neighbour costs one bit, so stream `k` contributes
//! `K_k * Q(g * gain_k * d_k / sqrt(2 sigma2))`, with `K_k` the mean neighbour
//! count, `d_k` the minimum distance, `g = 1/sqrt(n)` the per-stream amplitude
//! and `gain_k` the subchannel gain (`delta_k` for SVD, the geometric mean of
//! the top `n` singular values for QRS).

use crate::decomp::geometric_mean;
use crate::modem::{ModulationSet, Scheme};
use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// `ln Q(x)` for `x >= 0`, finite far into the tail.
fn ln_q(x: f64) -> f64 {
    if x < 30.0 {
        (0.5 * libm::erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        -0.5 * x * x - x.ln() - LN_SQRT_2PI + (-1.0 / (x * x)).ln_1p()
    }
}

/// Subchannel gain seen by each stream of `set`.
fn stream_gains(scheme: Scheme, deltas: &[f64], n: usize) -> Result<Vec<f64>> {
    if n > deltas.len() {
        return Err(Error::invalid(format!("{n} streams on {} subchannels", deltas.len())));
    }
    Ok(match scheme {
        Scheme::Svd => deltas[..n].to_vec(),
        Scheme::Qrs => vec![geometric_mean(&deltas[..n])?; n],
    })
}

/// Per-stream normalized decision distances `g * gain_k * d_k`.
fn distances(scheme: Scheme, deltas: &[f64], set: &ModulationSet) -> Result<Vec<f64>> {
    let n = set.stream_count();
    let g = 1.0 / (n as f64).sqrt();
    Ok(stream_gains(scheme, deltas, n)?
        .iter()
        .zip(set.streams())
        .map(|(gain, c)| g * gain * c.min_distance())
        .collect())
}

fn ln_score(scheme: Scheme, deltas: &[f64], set: &ModulationSet, sigma2: f64) -> Result<f64> {
    let terms: Vec<f64> = distances(scheme, deltas, set)?
        .iter()
        .zip(set.streams())
        .map(|(d, c)| c.mean_neighbours().ln() + ln_q(d / (2.0 * sigma2).sqrt()))
        .collect();
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Ok(peak);
    }
    Ok(peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln())
}

/// Nearest-neighbour estimate of the bit errors per channel use when `set`
/// (stream-assigned) is sent over a channel with singular values `deltas`.
pub fn expected_bit_errors(scheme: Scheme, deltas: &[f64], set: &ModulationSet, sigma2: f64) -> Result<f64> {
    if !(sigma2 >= 0.0) {
        return Err(Error::invalid(format!("noise variance {sigma2}")));
    }
    if sigma2 == 0.0 {
        return Ok(0.0);
    }
    Ok(ln_score(scheme, deltas, set, sigma2)?.exp())
}

/// Index of the candidate with the lowest expected bit errors; ties go to
/// the earliest candidate. Without noise the largest worst-stream decision
/// distance wins.
pub(crate) fn choose(scheme: Scheme, deltas: &[f64], candidates: &[ModulationSet], sigma2: f64) -> Result<usize> {
    let mut best = (0, f64::INFINITY);
    for (i, set) in candidates.iter().enumerate() {
        let score = if sigma2 > 0.0 {
            ln_score(scheme, deltas, set, sigma2)?
        } else {
            -distances(scheme, deltas, set)?.into_iter().fold(f64::INFINITY, f64::min)
        };
        if score < best.1 {
            best = (i, score);
        }
    }
    Ok(best.0)
}
