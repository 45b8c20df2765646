//! Fixed-set versus selection comparison of the two schemes.

use super::{select_envelope, selection_sweep, snr_at_ber, sweep, BerCurve, SelectionRule, SetSelection, SimConfig};
use crate::modem::Scheme;
use crate::{Error, Result};

/// Reference set for selection gains; listed for both schemes.
pub const REFERENCE_SET: &str = "QAM16-QAM16";

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    /// One curve per catalog set, in catalog order.
    pub fixed: Vec<BerCurve>,
    /// SNR at the target BER per fixed curve; `None` when not bracketed.
    pub fixed_snr: Vec<Option<f64>>,
    /// Index into `fixed` of the set reaching the target BER at lowest SNR.
    pub best_fixed: Option<usize>,
    /// Pointwise minimum over the fixed curves.
    pub envelope: BerCurve,
    pub envelope_snr: Option<f64>,
    /// Per-realization offline selection.
    pub selection: BerCurve,
    pub selection_snr: Option<f64>,
}

impl SchemeSummary {
    fn build(scheme: Scheme, fixed: Vec<BerCurve>, selection: BerCurve, target: f64) -> Result<Self> {
        let crossing = |c: &BerCurve| match snr_at_ber(c, target) {
            Ok(s) => Ok(Some(s)),
            Err(Error::NotBracketed { .. }) => Ok(None),
            Err(e) => Err(e),
        };
        let fixed_snr = fixed.iter().map(crossing).collect::<Result<Vec<_>>>()?;
        let best_fixed = fixed_snr
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (i, s)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i);
        let envelope = select_envelope(&fixed)?;
        let envelope_snr = crossing(&envelope)?;
        let selection_snr = crossing(&selection)?;
        Ok(SchemeSummary { scheme, fixed, fixed_snr, best_fixed, envelope, envelope_snr, selection, selection_snr })
    }

    pub fn best_fixed_curve(&self) -> Option<&BerCurve> {
        self.best_fixed.map(|i| &self.fixed[i])
    }

    pub fn best_fixed_snr(&self) -> Option<f64> {
        self.best_fixed.and_then(|i| self.fixed_snr[i])
    }

    pub fn snr_of(&self, set: &str) -> Option<f64> {
        self.fixed.iter().position(|c| c.set == set).and_then(|i| self.fixed_snr[i])
    }
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

/// Gaps in dB at the target BER. Each is oriented so that the expected
/// winner (QRS for fixed sets, SVD with selection) gives a positive value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSummary {
    /// Best fixed SVD minus best fixed QRS (positive: QRS better).
    pub fixed: Option<f64>,
    /// QRS selection minus SVD selection (positive: SVD better).
    pub selection: Option<f64>,
    /// Fixed reference set minus selection, SVD.
    pub svd_selection_gain: Option<f64>,
    /// Fixed reference set minus selection, QRS.
    pub qrs_selection_gain: Option<f64>,
    /// QRS envelope minus SVD envelope (positive: SVD better).
    pub envelope: Option<f64>,
    /// Fixed reference set minus pointwise envelope, SVD.
    pub svd_envelope_gain: Option<f64>,
    /// Fixed reference set minus pointwise envelope, QRS.
    pub qrs_envelope_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub target_ber: f64,
    pub svd: SchemeSummary,
    pub qrs: SchemeSummary,
    pub gaps: GapSummary,
}

/// Runs every catalog set and the selection curve for both schemes.
///
/// `base` supplies antennas, grid, seed, budget and workers; its scheme and
/// set fields are ignored.
pub fn compare(base: &SimConfig, rule: SelectionRule, target_ber: f64) -> Result<Comparison> {
    let mut summaries = Vec::with_capacity(2);
    for scheme in Scheme::ALL {
        let cfg = SimConfig { scheme, sets: SetSelection::All, ..base.clone() };
        let fixed = sweep(&cfg)?;
        let selection = selection_sweep(&cfg, rule)?;
        summaries.push(SchemeSummary::build(scheme, fixed, selection, target_ber)?);
    }
    let qrs = summaries.pop().expect("two schemes");
    let svd = summaries.pop().expect("two schemes");
    let gaps = GapSummary {
        fixed: diff(svd.best_fixed_snr(), qrs.best_fixed_snr()),
        selection: diff(qrs.selection_snr, svd.selection_snr),
        svd_selection_gain: diff(svd.snr_of(REFERENCE_SET), svd.selection_snr),
        qrs_selection_gain: diff(qrs.snr_of(REFERENCE_SET), qrs.selection_snr),
        envelope: diff(qrs.envelope_snr, svd.envelope_snr),
        svd_envelope_gain: diff(svd.snr_of(REFERENCE_SET), svd.envelope_snr),
        qrs_envelope_gain: diff(qrs.snr_of(REFERENCE_SET), qrs.envelope_snr),
    };
    Ok(Comparison { target_ber, svd, qrs, gaps })
}
