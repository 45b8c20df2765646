//! Fast invariant suites behind `beamsim selftest`.

use std::fmt;

use beamsim_core::channel::{draw_channel, RandomStream};
use beamsim_core::decomp::{geometric_mean, qrs_beamformer, svd_beamformer, QrsFactors};
use beamsim_core::matcore::{matmul, svd, unitarity_defect, ComplexMatrix};
use beamsim_core::modem::{build_constellation, catalog, ConstellationName, ModulationSet, Scheme, CATALOG_BITS};
use beamsim_core::simkit::{run_channel_use, simulate_point, Budget, Link, Policy};
use beamsim_core::Result;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

fn report(name: &'static str, result: Result<(bool, String)>) -> SuiteReport {
    match result {
        Ok((passed, detail)) => SuiteReport { name, passed, detail },
        Err(e) => SuiteReport { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Limits checked by the decomposition suite.
#[derive(Debug, Clone, Copy)]
pub struct DecompositionLimits {
    pub reconstruction: f64,
    pub unitarity: f64,
    pub equal_diagonal: f64,
    pub product: f64,
}

impl Default for DecompositionLimits {
    fn default() -> Self {
        use beamsim_core::tolerance::*;
        DecompositionLimits {
            reconstruction: FACTOR_RECONSTRUCTION,
            unitarity: UNITARITY,
            equal_diagonal: EQUAL_DIAGONAL,
            product: PRODUCT_CONSERVATION,
        }
    }
}

/// Largest defects seen by the decomposition suite.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DecompositionDefects {
    pub reconstruction: f64,
    pub unitarity: f64,
    pub equal_diagonal: f64,
    pub geometric_mean: f64,
    pub product: f64,
    pub below_diagonal: f64,
}

impl DecompositionDefects {
    pub fn within(&self, l: &DecompositionLimits) -> bool {
        self.reconstruction <= l.reconstruction
            && self.below_diagonal <= l.reconstruction
            && self.unitarity <= l.unitarity
            && self.equal_diagonal <= l.equal_diagonal
            && self.geometric_mean <= l.equal_diagonal
            && self.product <= l.product
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Measures every factorization invariant over `channels` random 4x4
/// channels and each stream count in 2..=4, using `qrs` for the equal-
/// diagonal factors.
pub fn measure_decompositions<F>(channels: usize, seed: u64, qrs: F) -> Result<DecompositionDefects>
where
    F: Fn(&ComplexMatrix, usize) -> Result<QrsFactors>,
{
    let mut rng = RandomStream::new(seed, 0x5e1f);
    let mut d = DecompositionDefects::default();
    let up = |slot: &mut f64, v: f64| *slot = slot.max(v);
    for _ in 0..channels {
        let h = draw_channel(&mut rng, 4, 4).h;
        let full = svd(&h)?;
        up(&mut d.reconstruction, full.reconstruct().distance(&h)?);
        up(&mut d.unitarity, unitarity_defect(&full.u)?);
        up(&mut d.unitarity, unitarity_defect(&full.v)?);
        for n in 2..=4 {
            let s = svd_beamformer(&h, n)?;
            let effective = matmul(&matmul(&s.u_n.conj_transpose(), &h)?, &s.v_n)?;
            up(&mut d.reconstruction, effective.distance(&ComplexMatrix::from_diag(&s.deltas))?);
            up(&mut d.unitarity, s.u_n.column_orthonormality_defect());
            up(&mut d.unitarity, s.v_n.column_orthonormality_defect());

            let q = qrs(&h, n)?;
            let effective = matmul(&matmul(&q.q.conj_transpose(), &h)?, &q.s)?;
            up(&mut d.reconstruction, effective.distance(&q.r_mat)?);
            if n == 4 {
                let rebuilt = matmul(&matmul(&q.q, &q.r_mat)?, &q.s.conj_transpose())?;
                up(&mut d.reconstruction, rebuilt.distance(&h)?);
            }
            up(&mut d.below_diagonal, q.r_mat.max_below_diagonal());
            up(&mut d.unitarity, q.q.column_orthonormality_defect());
            up(&mut d.unitarity, q.s.column_orthonormality_defect());

            let target = geometric_mean(&s.deltas)?;
            up(&mut d.geometric_mean, relative(q.r_diag, target));
            let mut product = 1.0;
            for k in 0..n {
                let r = q.r_mat[(k, k)];
                up(&mut d.equal_diagonal, relative(r.re, q.r_diag) + r.im.abs() / q.r_diag);
                up(&mut d.geometric_mean, relative(r.re, target));
                product *= r.re;
            }
            up(&mut d.product, relative(product, s.deltas.iter().product()));
        }
    }
    Ok(d)
}

fn decomposition_detail(channels: usize, d: &DecompositionDefects) -> String {
    format!(
        "{} factorizations; max reconstruction {:.2e}, max unitarity defect {:.2e}, \
         max below-diagonal {:.2e}, max equal-diagonal {:.2e}, max geometric-mean {:.2e}, max product {:.2e}",
        channels * 3,
        d.reconstruction,
        d.unitarity,
        d.below_diagonal,
        d.equal_diagonal,
        d.geometric_mean,
        d.product
    )
}

pub fn decomposition_suite(channels: usize, seed: u64) -> SuiteReport {
    report(
        "decomposition",
        measure_decompositions(channels, seed, qrs_beamformer)
            .map(|d| (d.within(&DecompositionLimits::default()), decomposition_detail(channels, &d))),
    )
}

/// QRS factors with the first diagonal entry nudged by one part in 1e6.
pub fn perturbed_qrs(h: &ComplexMatrix, n: usize) -> Result<QrsFactors> {
    let mut f = qrs_beamformer(h, n)?;
    let mut data = f.r_mat.as_slice().to_vec();
    data[0] *= 1.0 + 1e-6;
    f.r_mat = ComplexMatrix::new(n, n, data)?;
    Ok(f)
}

/// The decomposition checks must reject a factorization whose diagonal is
/// not equal.
pub fn negative_control_suite(seed: u64) -> SuiteReport {
    let channels = 20;
    report(
        "negative control",
        measure_decompositions(channels, seed, perturbed_qrs).map(|d| {
            let rejected = !d.within(&DecompositionLimits::default());
            let detail = format!(
                "perturbed diagonal {} (equal-diagonal defect {:.2e})",
                if rejected { "rejected" } else { "NOT rejected" },
                d.equal_diagonal
            );
            (rejected, detail)
        }),
    )
}

/// Catalogs exactly as listed for the 8 bps/Hz comparison.
pub const EXPECTED_CATALOG: [(Scheme, [&str; 4]); 2] = [
    (Scheme::Svd, ["QAM64-QPSK", "QAM16-QAM16", "QAM16-QPSK-QPSK", "QAM8-QAM8-QPSK"]),
    (Scheme::Qrs, ["QAM16-QAM16", "QAM16-QPSK-QPSK", "QAM8-QAM8-QPSK", "QPSK-QPSK-QPSK-QPSK"]),
];

pub fn modem_suite() -> SuiteReport {
    report("modem", check_modem())
}

fn check_modem() -> Result<(bool, String)> {
    let mut energy_defect = 0.0f64;
    let mut gray_violations = 0usize;
    let mut round_trip_failures = 0usize;
    let mut patterns = 0usize;
    for name in ConstellationName::ALL {
        let c = build_constellation(name.as_str())?;
        let n = c.points().len() as f64;
        let energy = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / n;
        energy_defect = energy_defect.max((energy - 1.0).abs());
        let dmin = c.min_distance();
        for (i, p) in c.points().iter().enumerate() {
            for (j, q) in c.points().iter().enumerate() {
                let adjacent = i != j && ((p - q).norm() - dmin).abs() <= 1e-9 * dmin;
                if adjacent && (c.label(i) ^ c.label(j)).count_ones() != 1 {
                    gray_violations += 1;
                }
            }
        }
        let m = c.bits_per_symbol();
        for label in 0..(1u32 << m) {
            let bits: Vec<u8> = (0..m).rev().map(|b| ((label >> b) & 1) as u8).collect();
            let point = c.modulate(&bits)?;
            patterns += 1;
            if c.demap(c.nearest_point(point)) != bits {
                round_trip_failures += 1;
            }
        }
    }
    let mut catalog_mismatches = Vec::new();
    for (scheme, expected) in EXPECTED_CATALOG {
        let got: Vec<ModulationSet> = catalog(scheme);
        let names: Vec<String> = got.iter().map(|s| s.name()).collect();
        if names != expected || got.iter().any(|s| s.total_bits() != CATALOG_BITS) {
            catalog_mismatches.push(scheme.to_string());
        }
    }
    let passed =
        energy_defect <= 1e-12 && gray_violations == 0 && round_trip_failures == 0 && catalog_mismatches.is_empty();
    let detail = format!(
        "max energy defect {energy_defect:.2e}, {gray_violations} Gray violations, \
         {round_trip_failures}/{patterns} round-trip failures, catalog mismatches: {}",
        if catalog_mismatches.is_empty() { "none".to_string() } else { catalog_mismatches.join(" ") }
    );
    Ok((passed, detail))
}

pub fn zero_noise_suite(channels: usize, seed: u64) -> SuiteReport {
    report("zero-noise exactness", check_zero_noise(channels, seed))
}

fn check_zero_noise(channels: usize, seed: u64) -> Result<(bool, String)> {
    let mut errors = 0u64;
    let mut bits = 0u64;
    let mut combos = 0;
    for scheme in Scheme::ALL {
        let link = Link { scheme, n_rx: 4, m_tx: 4 };
        for (i, set) in catalog(scheme).iter().enumerate() {
            combos += 1;
            let mut rng = RandomStream::new(seed, 0x2e40 + 16 * scheme as u64 + i as u64);
            for _ in 0..channels {
                let o = run_channel_use(&link, set, 0.0, &mut rng)?;
                errors += u64::from(o.bit_errors);
                bits += u64::from(o.bits);
            }
        }
    }
    Ok((errors == 0, format!("{combos} scheme/set pairs x {channels} channels, {errors} errors in {bits} bits")))
}

/// Bit error probability of Gray QPSK on a Rayleigh channel at mean SNR per
/// bit `gamma_b`.
pub fn rayleigh_qpsk_ber(gamma_b: f64) -> f64 {
    0.5 * (1.0 - (gamma_b / (1.0 + gamma_b)).sqrt())
}

/// One SNR point of the scalar oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePoint {
    pub snr_db: f64,
    pub measured: f64,
    pub expected: f64,
    pub bit_errors: u64,
}

impl OraclePoint {
    pub fn relative_error(&self) -> f64 {
        (self.measured - self.expected).abs() / self.expected
    }
}

/// Simulates single-stream QPSK over a 1x1 link. With unit transmit power
/// the mean SNR per bit is half the symbol SNR.
pub fn rayleigh_oracle(grid: &[f64], budget: Budget, seed: u64, workers: usize) -> Result<Vec<OraclePoint>> {
    let link = Link { scheme: Scheme::Svd, n_rx: 1, m_tx: 1 };
    let policy = Policy::Fixed(ModulationSet::new(&[ConstellationName::Qpsk])?);
    grid.iter()
        .map(|&snr_db| {
            let p = simulate_point(&link, &policy, snr_db, seed, budget, workers)?;
            let gamma_b = 10f64.powf(snr_db / 10.0) / 2.0;
            Ok(OraclePoint { snr_db, measured: p.ber, expected: rayleigh_qpsk_ber(gamma_b), bit_errors: p.bit_errors })
        })
        .collect()
}

/// Worst relative deviation over points whose measured BER is at least
/// `floor`, and whether it is within `tolerance`.
pub fn oracle_verdict(points: &[OraclePoint], floor: f64, tolerance: f64) -> (bool, String) {
    let scored: Vec<&OraclePoint> = points.iter().filter(|p| p.measured >= floor).collect();
    let worst = scored.iter().max_by(|a, b| a.relative_error().total_cmp(&b.relative_error()));
    let within = scored.iter().filter(|p| p.relative_error() <= tolerance).count();
    let passed = !scored.is_empty() && within == scored.len();
    let detail = match worst {
        Some(w) => format!(
            "{within}/{} points within {:.0}%; worst {:.2}% at {} dB ({} errors, measured {:.4e}, closed form {:.4e})",
            scored.len(),
            tolerance * 100.0,
            w.relative_error() * 100.0,
            w.snr_db,
            w.bit_errors,
            w.measured,
            w.expected
        ),
        None => "no points with BER above the floor".to_string(),
    };
    (passed, detail)
}

/// Scalar oracle at a budget large enough for a 5% comparison to be
/// statistically meaningful.
pub fn rayleigh_suite(seed: u64, workers: usize) -> SuiteReport {
    let budget = Budget { min_bit_errors: 10_000, max_channel_uses: 4_000_000 };
    let grid: Vec<f64> = (0..=5).map(|k| 4.0 * k as f64).collect();
    report("1x1 Rayleigh oracle", rayleigh_oracle(&grid, budget, seed, workers).map(|p| oracle_verdict(&p, 1e-3, 0.05)))
}

/// Every suite, in report order.
pub fn run_all(seed: u64, workers: usize) -> Vec<SuiteReport> {
    vec![
        decomposition_suite(1000, seed),
        negative_control_suite(seed),
        modem_suite(),
        zero_noise_suite(1000, seed),
        rayleigh_suite(seed, workers),
    ]
}
