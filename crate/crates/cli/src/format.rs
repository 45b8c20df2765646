//! Locale-independent text output.

use std::fmt::Write as _;

use beamsim_core::simkit::BerCurve;

pub const CSV_HEADER: &str = "scheme,set,snr_db,channel_uses,bits_sent,bit_errors,ber";

/// `x` to 6 significant digits: fixed-point for exponents -5..=5, scientific
/// otherwise, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..=5).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One curve as CSV, header included. The `set` column carries each point's
/// own set label, so envelopes show the winning set per SNR.
pub fn curve_csv(curve: &BerCurve) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            curve.scheme,
            p.set,
            sig6(p.snr_db),
            p.channel_uses,
            p.bits_sent,
            p.bit_errors,
            sig6(p.ber)
        )
        .expect("writing to a String");
    }
    out
}

/// Fraction of channel uses given to each candidate set, per SNR.
pub fn usage_csv(curve: &BerCurve, set_names: &[String]) -> String {
    let mut out = format!("scheme,snr_db,{}\n", set_names.join(","));
    for p in &curve.points {
        let total: u64 = p.set_usage.iter().sum();
        let shares: Vec<String> =
            p.set_usage.iter().map(|&u| sig6(if total == 0 { 0.0 } else { u as f64 / total as f64 })).collect();
        writeln!(out, "{},{},{}", curve.scheme, sig6(p.snr_db), shares.join(",")).expect("writing to a String");
    }
    out
}

/// A dB value or the literal `not bracketed`.
pub fn db_or_missing(v: Option<f64>) -> String {
    v.map_or_else(|| "not bracketed".to_string(), sig6)
}
