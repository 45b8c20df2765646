//! Receiver-side detection on the effective channel.
//!
//! After the receive filter the SVD link is `z = gain * diag(deltas) u + w`
//! and the QRS link is `z = gain * R u + w` with `R` upper triangular. The
//! first decouples into scalar slicers; the second is detected bottom-up with
//! hard-decision successive interference cancellation.

use num_complex::Complex64;

use crate::matcore::ComplexMatrix;
use crate::modem::ModulationSet;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionResult {
    pub per_stream_indices: Vec<usize>,
    pub per_stream_bits: Vec<Vec<u8>>,
}

impl DetectionResult {
    fn from_indices(indices: Vec<usize>, set: &ModulationSet) -> Self {
        let per_stream_bits = indices.iter().zip(set.streams()).map(|(&idx, c)| c.demap(idx)).collect();
        DetectionResult { per_stream_indices: indices, per_stream_bits }
    }
}

fn check_gain(gain: f64) -> Result<()> {
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(Error::invalid(format!("gain must be positive, got {gain}")));
    }
    Ok(())
}

/// Per-subchannel scalar ML detection.
pub fn svd_detect(z: &[Complex64], deltas: &[f64], set: &ModulationSet, gain: f64) -> Result<DetectionResult> {
    let mut indices = vec![0; set.stream_count()];
    svd_detect_into(z, deltas, set, gain, &mut indices)?;
    Ok(DetectionResult::from_indices(indices, set))
}

pub(crate) fn svd_detect_into(
    z: &[Complex64],
    deltas: &[f64],
    set: &ModulationSet,
    gain: f64,
    out: &mut [usize],
) -> Result<()> {
    let n = set.stream_count();
    if z.len() != n || deltas.len() != n || out.len() != n {
        return Err(Error::dims(format!("{} observations and {} gains for {n} streams", z.len(), deltas.len())));
    }
    check_gain(gain)?;
    if let Some(d) = deltas.iter().find(|&&d| !(d > 0.0)) {
        return Err(Error::RankDeficient(format!("subchannel gain {d}")));
    }
    for (k, c) in set.streams().iter().enumerate() {
        out[k] = c.nearest_point(z[k] / (gain * deltas[k]));
    }
    Ok(())
}

/// Hard-decision SIC on an upper-triangular effective channel, last stream
/// first.
pub fn sic_detect(z: &[Complex64], r_mat: &ComplexMatrix, set: &ModulationSet, gain: f64) -> Result<DetectionResult> {
    let mut indices = vec![0; set.stream_count()];
    sic_detect_into(z, r_mat, set, gain, &mut indices)?;
    Ok(DetectionResult::from_indices(indices, set))
}

pub(crate) fn sic_detect_into(
    z: &[Complex64],
    r_mat: &ComplexMatrix,
    set: &ModulationSet,
    gain: f64,
    out: &mut [usize],
) -> Result<()> {
    let n = set.stream_count();
    if z.len() != n || r_mat.rows() != n || r_mat.cols() != n || out.len() != n {
        return Err(Error::dims(format!(
            "{} observations and a {}x{} triangle for {n} streams",
            z.len(),
            r_mat.rows(),
            r_mat.cols()
        )));
    }
    check_gain(gain)?;
    for k in 0..n {
        let d = r_mat[(k, k)];
        if !(d.re > 0.0) || d.im != 0.0 {
            return Err(Error::invalid(format!("diagonal entry {k} is {d}, not positive real")));
        }
    }

    let streams = set.streams();
    let mut decided = [Complex64::new(0.0, 0.0); crate::modem::MAX_STREAMS];
    for k in (0..n).rev() {
        let mut residual = z[k];
        for j in k + 1..n {
            residual -= r_mat[(k, j)] * decided[j] * gain;
        }
        let idx = streams[k].nearest_point(residual / (gain * r_mat[(k, k)].re));
        out[k] = idx;
        decided[k] = streams[k].points()[idx];
    }
    Ok(())
}
