use super::{BerCurve, BerPoint, ENVELOPE_LABEL};
use crate::{Error, Result};

/// Pointwise minimum-BER curve over `curves`.
///
/// Each point is the winning set's point, with its set name, so error counts
/// carry through. Ties go to the earlier curve.
pub fn select_envelope(curves: &[BerCurve]) -> Result<BerCurve> {
    let first = curves.first().ok_or_else(|| Error::invalid("no curves to select from"))?;
    let grid = first.snr_grid();
    for c in curves {
        if c.scheme != first.scheme {
            return Err(Error::invalid("curves from different schemes"));
        }
        if c.snr_grid() != grid {
            return Err(Error::invalid(format!("{} has a different SNR grid", c.set)));
        }
    }
    let points: Vec<BerPoint> = (0..grid.len())
        .map(|i| {
            curves
                .iter()
                .map(|c| &c.points[i])
                .reduce(|best, p| if p.ber < best.ber { p } else { best })
                .expect("at least one curve")
                .clone()
        })
        .collect();
    let set = if curves.len() == 1 { first.set.clone() } else { ENVELOPE_LABEL.to_string() };
    Ok(BerCurve { scheme: first.scheme, set, points })
}

/// SNR at which the curve first falls to `target_ber`, interpolating
/// `log10(BER)` linearly in dB between the bracketing grid points.
///
/// A zero-error point is treated as the smallest positive BER, which puts the
/// crossing at the preceding grid point.
pub fn snr_at_ber(curve: &BerCurve, target_ber: f64) -> Result<f64> {
    if !(target_ber > 0.0) {
        return Err(Error::invalid(format!("target BER {target_ber}")));
    }
    let log_ber = |p: &BerPoint| p.ber.max(f64::MIN_POSITIVE).log10();
    let target = target_ber.log10();
    for (i, p) in curve.points.iter().enumerate() {
        if p.ber == target_ber {
            return Ok(p.snr_db);
        }
        if let Some(next) = curve.points.get(i + 1) {
            if p.ber > target_ber && next.ber < target_ber {
                let (a, b) = (log_ber(p), log_ber(next));
                let t = (a - target) / (a - b);
                return Ok(p.snr_db + t * (next.snr_db - p.snr_db));
            }
        }
    }
    Err(Error::NotBracketed { target: target_ber })
}
