//! Acceptance criteria, one line each. Run with
//! `cargo test -p beamsim-cli --test acceptance -- --nocapture`.
//!
//! Lines go straight to the process's stdout, so they also appear in a plain
//! `cargo test` log.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;

use beamsim_cli::selftest::{
    measure_decompositions, modem_suite, oracle_verdict, rayleigh_oracle, zero_noise_suite, DecompositionLimits,
};
use beamsim_core::decomp::qrs_beamformer;
use beamsim_core::modem::Scheme;
use beamsim_core::simkit::{compare, Budget, Comparison, SelectionRule, SimConfig};

const TARGET_BER: f64 = 1e-3;
const REFERENCE_SET: &str = "QAM16-QAM16";

struct Verdict {
    id: u8,
    title: &'static str,
    /// The part that must hold: the whole criterion, or its sign/ordering
    /// when a magnitude target is attached.
    required: bool,
    /// Magnitude targets; `None` when the criterion has none.
    target: Option<bool>,
    detail: String,
    /// Why a failure of this criterion does not fail the run.
    waiver: Option<&'static str>,
}

impl Verdict {
    fn met(&self) -> bool {
        self.required && self.target.unwrap_or(true)
    }

    fn line(&self) -> String {
        let status = if self.met() { "PASS" } else { "FAIL" };
        let split = match self.target {
            Some(t) => format!(
                " [required: {}; target: {}]",
                if self.required { "met" } else { "missed" },
                if t { "met" } else { "missed" }
            ),
            None => String::new(),
        };
        let waiver = self.waiver.filter(|_| !self.required).map(|w| format!(" [known red: {w}]")).unwrap_or_default();
        format!("{status} criterion {} ({}){split}: {}{waiver}", self.id, self.title, self.detail)
    }
}

fn fmt_db(v: Option<f64>) -> String {
    v.map_or_else(|| "not bracketed".into(), |x| format!("{x:.2} dB"))
}

fn within(v: Option<f64>, target: f64, tol: f64) -> bool {
    v.is_some_and(|x| (x - target).abs() <= tol)
}

fn decomposition() -> Verdict {
    let d = measure_decompositions(1000, 2024, qrs_beamformer).expect("random channels factorize");
    Verdict {
        id: 1,
        title: "decomposition suite",
        required: d.within(&DecompositionLimits::default()),
        target: None,
        detail: format!(
            "1000 channels x n in 2..=4: reconstruction {:.2e} (<= 1e-9), unitarity {:.2e} (<= 1e-10), \
             below-diagonal {:.2e}, equal-diagonal {:.2e} (<= 1e-9), geometric mean {:.2e} (<= 1e-9), \
             product {:.2e} (<= 1e-8)",
            d.reconstruction, d.unitarity, d.below_diagonal, d.equal_diagonal, d.geometric_mean, d.product
        ),
        waiver: None,
    }
}

fn modem() -> Verdict {
    let r = modem_suite();
    Verdict { id: 2, title: "modem suite", required: r.passed, target: None, detail: r.detail, waiver: None }
}

fn zero_noise() -> Verdict {
    let r = zero_noise_suite(1000, 2024);
    Verdict { id: 3, title: "zero-noise exactness", required: r.passed, target: None, detail: r.detail, waiver: None }
}

/// Bit errors per point at which the 5% comparison has a statistical margin.
const ORACLE_CHECK_ERRORS: u64 = 50_000;

/// Criterion 4 as stated, plus the same comparison at a budget where 5% is
/// several standard errors. At about 200 errors per point the relative
/// standard error is near 8% (both bits of a use share one fade), so the
/// stated form fails for a correct simulator on roughly half the points.
/// Returns the verdict and whether the large-budget check passed.
fn scalar_oracle() -> (Verdict, bool) {
    let grid: Vec<f64> = (0..=24).map(f64::from).collect();
    let points = rayleigh_oracle(&grid, Budget::PAPER, 1, 1).expect("1x1 link simulates");
    let (passed, detail) = oracle_verdict(&points, TARGET_BER, 0.05);
    let large = Budget { min_bit_errors: ORACLE_CHECK_ERRORS, max_channel_uses: 100_000_000 };
    let points = rayleigh_oracle(&grid, large, 1, 1).expect("1x1 link simulates");
    let (check, check_detail) = oracle_verdict(&points, TARGET_BER, 0.05);
    let verdict = Verdict {
        id: 4,
        title: "1x1 Rayleigh QPSK oracle, paper budget",
        required: passed,
        target: None,
        detail: format!("{detail}; at {ORACLE_CHECK_ERRORS} errors per point: {check_detail}"),
        waiver: Some("200 errors per point gives ~8% relative standard error, above the 5% tolerance"),
    };
    (verdict, check)
}

fn determinism() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = root.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_beamsim"))
            .args(["compare", "--budget", "fast", "--seed", "5", "--out", dir.to_str().unwrap()])
            .status()
            .expect("binary runs");
        assert!(status.success());
        dir
    };
    let (a, b) = (run("a"), run("b"));
    let csvs = |d: &Path| {
        let mut v: Vec<_> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|n| n.ends_with(".csv"))
            .collect();
        v.sort();
        v
    };
    let names = csvs(&a);
    let identical =
        names == csvs(&b) && names.iter().all(|n| fs::read(a.join(n)).unwrap() == fs::read(b.join(n)).unwrap());
    Verdict {
        id: 5,
        title: "determinism",
        required: identical && !names.is_empty(),
        target: None,
        detail: format!("{} CSVs from two compare runs, byte-identical: {identical}", names.len()),
        waiver: None,
    }
}

fn full_compare() -> Comparison {
    compare(&SimConfig::new(Scheme::Svd), SelectionRule::FewestErrors, TARGET_BER).expect("paper compare runs")
}

fn fixed_ordering(c: &Comparison) -> Verdict {
    let gap = c.gaps.fixed;
    let name =
        |s: &beamsim_core::simkit::SchemeSummary| s.best_fixed_curve().map_or("none".to_string(), |c| c.set.clone());
    Verdict {
        id: 6,
        title: "best fixed QRS beats best fixed SVD",
        required: gap.is_some_and(|g| g > 0.0),
        target: Some(within(gap, 1.0, 0.75)),
        detail: format!(
            "SVD best {} at {}, QRS best {} at {}; gap {} (target 1.0 +/- 0.75, positive = QRS better)",
            name(&c.svd),
            fmt_db(c.svd.best_fixed_snr()),
            name(&c.qrs),
            fmt_db(c.qrs.best_fixed_snr()),
            fmt_db(gap)
        ),
        waiver: None,
    }
}

fn best_qrs_set(c: &Comparison) -> Verdict {
    let best = c.qrs.best_fixed_curve().map(|c| c.set.clone());
    let all: Vec<String> =
        c.qrs.fixed.iter().zip(&c.qrs.fixed_snr).map(|(f, s)| format!("{} {}", f.set, fmt_db(*s))).collect();
    Verdict {
        id: 7,
        title: "QAM16-QAM16 is the best fixed QRS set",
        required: best.as_deref() == Some(REFERENCE_SET),
        target: None,
        detail: all.join(", "),
        waiver: None,
    }
}

fn selection_ordering(c: &Comparison) -> Verdict {
    let gap = c.gaps.selection;
    Verdict {
        id: 8,
        title: "SVD selection beats QRS selection",
        required: gap.is_some_and(|g| g > 0.0),
        target: Some(within(gap, 1.0, 0.75)),
        detail: format!(
            "per-realization selection: SVD {}, QRS {}; gap {} (target 1.0 +/- 0.75, positive = SVD better); \
             pointwise envelopes: SVD {}, QRS {}",
            fmt_db(c.svd.selection_snr),
            fmt_db(c.qrs.selection_snr),
            fmt_db(gap),
            fmt_db(c.svd.envelope_snr),
            fmt_db(c.qrs.envelope_snr)
        ),
        waiver: None,
    }
}

fn selection_gains(c: &Comparison) -> Verdict {
    let (svd, qrs) = (c.gaps.svd_selection_gain, c.gaps.qrs_selection_gain);
    Verdict {
        id: 9,
        title: "selection gains over fixed QAM16-QAM16",
        required: matches!((svd, qrs), (Some(s), Some(q)) if s > q),
        target: Some(within(svd, 4.5, 1.0) && within(qrs, 2.5, 1.0)),
        detail: format!(
            "SVD gain {} (target 4.5 +/- 1.0), QRS gain {} (target 2.5 +/- 1.0); \
             pointwise-envelope gains: SVD {}, QRS {}",
            fmt_db(svd),
            fmt_db(qrs),
            fmt_db(c.gaps.svd_envelope_gain),
            fmt_db(c.gaps.qrs_envelope_gain)
        ),
        waiver: None,
    }
}

fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").and_then(|_| out.flush()).expect("stdout is writable");
}

#[test]
fn acceptance_criteria() {
    let mut verdicts = Vec::new();
    let mut report = |v: Verdict| {
        say(&v.line());
        verdicts.push(v);
    };
    report(decomposition());
    report(modem());
    report(zero_noise());
    let (oracle, oracle_check) = scalar_oracle();
    report(oracle);
    report(determinism());
    let c = full_compare();
    report(fixed_ordering(&c));
    report(best_qrs_set(&c));
    report(selection_ordering(&c));
    report(selection_gains(&c));

    let met = verdicts.iter().filter(|v| v.met()).count();
    say(&format!("{met}/{} criteria fully met", verdicts.len()));
    let failed: Vec<u8> = verdicts.iter().filter(|v| !v.met() && v.waiver.is_none()).map(|v| v.id).collect();
    assert!(failed.is_empty(), "criteria {failed:?} not met");
    assert!(oracle_check, "scalar oracle disagrees at {ORACLE_CHECK_ERRORS} errors per point");
}
