//! Monte Carlo BER engine.
//!
//! One channel use draws a fresh Rayleigh channel, recomputes the scheme's
//! precoder for the set's stream count, sends one symbol per stream at total
//! transmit power 1 and counts bit errors after detection. Each (curve, SNR)
//! cell is simulated in fixed-size chunks, every chunk on its own random
//! substream, and chunks are merged in index order until the stopping rule
//! fires. The result therefore does not depend on how many workers ran the
//! chunks.

mod compare;
mod curves;
mod selection;

pub use compare::{compare, Comparison, GapSummary, SchemeSummary};
pub use curves::{select_envelope, snr_at_ber};
pub use selection::expected_bit_errors;

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{add_noise_in_place, draw_channel, RandomStream};
use crate::decomp::{qrs_factors_from, svd_factors_from};
use crate::detect::{sic_detect_into, svd_detect_into};
use crate::matcore::{svd, ComplexMatrix, Svd};
use crate::modem::{catalog, ModulationSet, Scheme, MAX_STREAMS};
use crate::{Error, Result};

/// Channel uses per simulation chunk.
pub const CHUNK_USES: u64 = 500;

/// Stopping rule for one (curve, SNR) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub min_bit_errors: u64,
    pub max_channel_uses: u64,
}

impl Budget {
    /// CI-sized runs.
    pub const FAST: Budget = Budget { min_bit_errors: 50, max_channel_uses: 100_000 };
    /// Reproduction runs.
    pub const PAPER: Budget = Budget { min_bit_errors: 200, max_channel_uses: 2_000_000 };
}

impl Default for Budget {
    fn default() -> Self {
        Budget::PAPER
    }
}

/// Which modulation sets a run covers.
#[derive(Debug, Clone, PartialEq)]
pub enum SetSelection {
    One(ModulationSet),
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m_tx: usize,
    pub n_rx: usize,
    pub scheme: Scheme,
    pub sets: SetSelection,
    pub snr_grid: Vec<f64>,
    pub seed: u64,
    pub budget: Budget,
    pub workers: usize,
}

impl SimConfig {
    /// 4x4 link, full catalog, 0..=24 dB in 1 dB steps.
    pub fn new(scheme: Scheme) -> Self {
        SimConfig {
            m_tx: 4,
            n_rx: 4,
            scheme,
            sets: SetSelection::All,
            snr_grid: snr_grid(0.0, 24.0, 1.0).expect("valid default grid"),
            seed: 1,
            budget: Budget::PAPER,
            workers: 1,
        }
    }

    pub fn link(&self) -> Link {
        Link { scheme: self.scheme, n_rx: self.n_rx, m_tx: self.m_tx }
    }

    /// The sets this configuration expands to.
    pub fn modulation_sets(&self) -> Vec<ModulationSet> {
        match &self.sets {
            SetSelection::One(set) => vec![set.clone()],
            SetSelection::All => catalog(self.scheme),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_tx == 0 || self.n_rx == 0 {
            return Err(Error::invalid("antenna counts must be at least 1"));
        }
        if self.snr_grid.is_empty() {
            return Err(Error::invalid("empty SNR grid"));
        }
        if self.snr_grid.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("SNR grid must be finite"));
        }
        if self.snr_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("SNR grid must be strictly increasing"));
        }
        if self.budget.min_bit_errors == 0 || self.budget.max_channel_uses == 0 {
            return Err(Error::invalid("budget limits must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("at least one worker is required"));
        }
        let bound = self.m_tx.min(self.n_rx);
        for set in self.modulation_sets() {
            if set.stream_count() > bound {
                return Err(Error::invalid(format!(
                    "{set} needs {} streams but a {}x{} link supports {bound}",
                    set.stream_count(),
                    self.n_rx,
                    self.m_tx
                )));
            }
        }
        Ok(())
    }
}

/// Inclusive `start:stop:step` grid in dB.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::invalid(format!("invalid SNR grid {start}:{stop}:{step}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// Per-receive-antenna noise variance at total transmit power 1.
pub fn snr_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Antenna geometry and precoding scheme of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub scheme: Scheme,
    pub n_rx: usize,
    pub m_tx: usize,
}

/// Errors observed in one channel use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UseOutcome {
    pub bits: u32,
    pub bit_errors: u32,
    pub per_stream_errors: [u32; MAX_STREAMS],
    pub streams: usize,
    /// Index of the set used among the offered candidates.
    pub set_index: usize,
}

/// Orders a set's constellations onto the scheme's streams.
///
/// SVD puts the largest alphabet on the strongest subchannel; QRS keeps the
/// listed order.
pub fn assign_streams(scheme: Scheme, set: &ModulationSet) -> ModulationSet {
    match scheme {
        Scheme::Qrs => set.clone(),
        Scheme::Svd => {
            let mut names: Vec<_> = set.streams().iter().map(|c| c.name()).collect();
            names.sort_by_key(|n| std::cmp::Reverse(n.bits_per_symbol()));
            ModulationSet::new(&names).expect("same stream count")
        }
    }
}

/// One channel use with a fixed modulation set.
pub fn run_channel_use(link: &Link, set: &ModulationSet, sigma2: f64, rng: &mut RandomStream) -> Result<UseOutcome> {
    let assigned = assign_streams(link.scheme, set);
    run_use(link, std::slice::from_ref(&assigned), None, sigma2, rng)
}

/// One channel use where the set is picked per realization among
/// `candidates` (already stream-assigned) by `rule`.
pub fn run_selected_channel_use(
    link: &Link,
    candidates: &[ModulationSet],
    rule: SelectionRule,
    sigma2: f64,
    rng: &mut RandomStream,
) -> Result<UseOutcome> {
    run_use(link, candidates, Some(rule), sigma2, rng)
}

fn run_use(
    link: &Link,
    candidates: &[ModulationSet],
    rule: Option<SelectionRule>,
    sigma2: f64,
    rng: &mut RandomStream,
) -> Result<UseOutcome> {
    let h = draw_channel(rng, link.n_rx, link.m_tx).h;
    let full = svd(&h)?;
    let max_bits = candidates.iter().map(|s| s.total_bits()).max().unwrap_or(0);
    let bits = rng.bits(max_bits as usize);
    let mut noise = vec![Complex64::new(0.0, 0.0); link.n_rx];
    add_noise_in_place(&mut noise, sigma2, rng)?;
    let tx = Transmission { link, h: &h, full: &full, bits: &bits, noise: &noise };

    match rule {
        None => tx.send(&candidates[0], 0),
        Some(SelectionRule::ExpectedErrors) => {
            let idx = selection::choose(link.scheme, &full.deltas, candidates, sigma2)?;
            tx.send(&candidates[idx], idx)
        }
        Some(SelectionRule::FewestErrors) => {
            let mut best: Option<UseOutcome> = None;
            for (idx, set) in candidates.iter().enumerate() {
                let o = tx.send(set, idx)?;
                if best.is_none_or(|b| o.bit_errors < b.bit_errors) {
                    best = Some(o);
                }
            }
            best.ok_or_else(|| Error::invalid("no candidate sets"))
        }
    }
}

/// Everything random about one channel use except the modulation set.
struct Transmission<'a> {
    link: &'a Link,
    h: &'a ComplexMatrix,
    full: &'a Svd,
    /// Information bits; a set uses as many as it carries, stream 1 first.
    bits: &'a [u8],
    /// CN(0, sigma2) per receive antenna.
    noise: &'a [Complex64],
}

impl Transmission<'_> {
    fn send(&self, set: &ModulationSet, set_index: usize) -> Result<UseOutcome> {
        let n = set.stream_count();
        let gain = 1.0 / (n as f64).sqrt();

        let mut labels = [0u8; MAX_STREAMS];
        let mut symbols = [Complex64::new(0.0, 0.0); MAX_STREAMS];
        let mut offset = 0;
        for (k, c) in set.streams().iter().enumerate() {
            let width = c.bits_per_symbol() as usize;
            let label = self.bits[offset..offset + width].iter().fold(0u8, |acc, &b| (acc << 1) | b);
            offset += width;
            labels[k] = label;
            symbols[k] = c.point_for_label(label) * gain;
        }

        let received = |precoder: &ComplexMatrix| -> Result<Vec<Complex64>> {
            let x = precoder.mul_vec(&symbols[..n])?;
            let mut y = self.h.mul_vec(&x)?;
            for (yi, ni) in y.iter_mut().zip(self.noise) {
                *yi += ni;
            }
            Ok(y)
        };

        let mut detected = [0usize; MAX_STREAMS];
        match self.link.scheme {
            Scheme::Svd => {
                let f = svd_factors_from(self.full, n)?;
                let z = f.u_n.adjoint_mul_vec(&received(&f.v_n)?)?;
                svd_detect_into(&z, &f.deltas, set, gain, &mut detected[..n])?;
            }
            Scheme::Qrs => {
                let f = qrs_factors_from(self.full, n)?;
                let z = f.q.adjoint_mul_vec(&received(&f.s)?)?;
                sic_detect_into(&z, &f.r_mat, set, gain, &mut detected[..n])?;
            }
        }

        let mut out = UseOutcome { bits: set.total_bits(), streams: n, set_index, ..Default::default() };
        for (k, c) in set.streams().iter().enumerate() {
            let e = (labels[k] ^ c.label(detected[k])).count_ones();
            out.per_stream_errors[k] = e;
            out.bit_errors += e;
        }
        Ok(out)
    }
}

/// Error statistics at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    /// Set that produced this point: the curve's set, an envelope winner, or
    /// [`SELECTION_LABEL`] for per-realization selection.
    pub set: String,
    pub channel_uses: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub per_stream_errors: Vec<u64>,
    /// Channel uses per candidate set, for per-realization selection only.
    pub set_usage: Vec<u64>,
}

/// Set label of per-realization selection curves.
pub const SELECTION_LABEL: &str = "SELECT";

/// Set label of pointwise-minimum envelopes.
pub const ENVELOPE_LABEL: &str = "ENVELOPE";

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub scheme: Scheme,
    pub set: String,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn snr_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_db).collect()
    }
}

impl fmt::Display for BerCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.scheme, self.set)?;
        for p in &self.points {
            writeln!(
                f,
                "  {:6.2} dB  {:>10} bits  {:>7} errors  BER {:.4e}",
                p.snr_db, p.bits_sent, p.bit_errors, p.ber
            )?;
        }
        Ok(())
    }
}

/// Running totals for one cell.
#[derive(Debug, Clone, Default, PartialEq)]
struct Tally {
    uses: u64,
    bits: u64,
    errors: u64,
    per_stream: [u64; MAX_STREAMS],
    usage: Vec<u64>,
}

impl Tally {
    fn with_candidates(n: usize) -> Self {
        Tally { usage: vec![0; n], ..Default::default() }
    }

    fn add_use(&mut self, o: &UseOutcome) {
        self.uses += 1;
        self.bits += u64::from(o.bits);
        self.errors += u64::from(o.bit_errors);
        for k in 0..o.streams {
            self.per_stream[k] += u64::from(o.per_stream_errors[k]);
        }
        self.usage[o.set_index] += 1;
    }

    fn merge(&mut self, other: &Tally) {
        self.uses += other.uses;
        self.bits += other.bits;
        self.errors += other.errors;
        for k in 0..MAX_STREAMS {
            self.per_stream[k] += other.per_stream[k];
        }
        for (a, b) in self.usage.iter_mut().zip(&other.usage) {
            *a += b;
        }
    }
}

/// How per-realization selection picks a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    /// Lowest nearest-neighbour estimate of the expected bit errors given the
    /// channel and noise level.
    ExpectedErrors,
    /// Every candidate is sent over the same channel, noise and information
    /// bits; the one with the fewest bit errors is kept.
    FewestErrors,
}

/// What a cell transmits.
#[derive(Debug, Clone)]
pub enum Policy {
    Fixed(ModulationSet),
    /// Per-realization choice among the given sets.
    Selection(SelectionRule, Vec<ModulationSet>),
}

impl Policy {
    fn label(&self) -> String {
        match self {
            Policy::Fixed(set) => set.name(),
            Policy::Selection(..) => SELECTION_LABEL.to_string(),
        }
    }

    fn candidates(&self, scheme: Scheme) -> Vec<ModulationSet> {
        match self {
            Policy::Fixed(set) => vec![assign_streams(scheme, set)],
            Policy::Selection(_, sets) => sets.iter().map(|s| assign_streams(scheme, s)).collect(),
        }
    }

    fn rule(&self) -> Option<SelectionRule> {
        match self {
            Policy::Fixed(_) => None,
            Policy::Selection(rule, _) => Some(*rule),
        }
    }

    fn max_streams(&self) -> usize {
        match self {
            Policy::Fixed(set) => set.stream_count(),
            Policy::Selection(_, sets) => sets.iter().map(|s| s.stream_count()).max().unwrap_or(0),
        }
    }
}

/// FNV-1a, used to key random substreams by curve name.
fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Substream of chunk `chunk` in the cell (`curve`, `snr_db`).
pub fn cell_stream_id(scheme: Scheme, curve: &str, snr_db: f64, chunk: u64) -> u64 {
    let key = fnv1a(&format!("{scheme}/{curve}"));
    crate::channel::substream_seed(key ^ snr_db.to_bits().rotate_left(17), chunk)
}

fn run_chunk(
    link: &Link,
    candidates: &[ModulationSet],
    rule: Option<SelectionRule>,
    sigma2: f64,
    uses: u64,
    mut rng: RandomStream,
) -> Result<Tally> {
    let mut tally = Tally::with_candidates(candidates.len());
    for _ in 0..uses {
        tally.add_use(&run_use(link, candidates, rule, sigma2, &mut rng)?);
    }
    Ok(tally)
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))
}

/// Simulates one (policy, SNR) cell until the budget's stopping rule fires.
pub fn simulate_point(
    link: &Link,
    policy: &Policy,
    snr_db: f64,
    seed: u64,
    budget: Budget,
    workers: usize,
) -> Result<BerPoint> {
    let pool = thread_pool(workers.max(1))?;
    simulate_point_in(&pool, link, policy, snr_db, seed, budget)
}

fn simulate_point_in(
    pool: &rayon::ThreadPool,
    link: &Link,
    policy: &Policy,
    snr_db: f64,
    seed: u64,
    budget: Budget,
) -> Result<BerPoint> {
    let label = policy.label();
    let candidates = policy.candidates(link.scheme);
    let rule = policy.rule();
    let sigma2 = snr_to_sigma2(snr_db);
    let wave = pool.current_num_threads().max(1) as u64;

    let mut total = Tally::with_candidates(candidates.len());
    let mut next_chunk = 0u64;
    'outer: loop {
        let chunks: Vec<(u64, u64)> = (0..wave)
            .map(|i| next_chunk + i)
            .filter_map(|k| {
                let start = k * CHUNK_USES;
                (start < budget.max_channel_uses).then(|| (k, CHUNK_USES.min(budget.max_channel_uses - start)))
            })
            .collect();
        if chunks.is_empty() {
            break;
        }
        next_chunk += wave;
        let tallies: Vec<Result<Tally>> = pool.install(|| {
            chunks
                .par_iter()
                .map(|&(k, uses)| {
                    let rng = RandomStream::new(seed, cell_stream_id(link.scheme, &label, snr_db, k));
                    run_chunk(link, &candidates, rule, sigma2, uses, rng)
                })
                .collect()
        });
        for t in tallies {
            total.merge(&t?);
            if total.errors >= budget.min_bit_errors || total.uses >= budget.max_channel_uses {
                break 'outer;
            }
        }
    }

    let streams = policy.max_streams();
    Ok(BerPoint {
        snr_db,
        set: label,
        channel_uses: total.uses,
        bits_sent: total.bits,
        bit_errors: total.errors,
        ber: if total.bits == 0 { 0.0 } else { total.errors as f64 / total.bits as f64 },
        per_stream_errors: total.per_stream[..streams].to_vec(),
        set_usage: if rule.is_some() { total.usage } else { Vec::new() },
    })
}

fn simulate_curve(pool: &rayon::ThreadPool, cfg: &SimConfig, policy: &Policy) -> Result<BerCurve> {
    let link = cfg.link();
    let points = cfg
        .snr_grid
        .iter()
        .map(|&snr| simulate_point_in(pool, &link, policy, snr, cfg.seed, cfg.budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve { scheme: cfg.scheme, set: policy.label(), points })
}

/// One BER curve per configured modulation set.
pub fn sweep(cfg: &SimConfig) -> Result<Vec<BerCurve>> {
    cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    cfg.modulation_sets().into_iter().map(|set| simulate_curve(&pool, cfg, &Policy::Fixed(set))).collect()
}

/// BER curve of per-realization offline selection over the scheme's catalog.
pub fn selection_sweep(cfg: &SimConfig, rule: SelectionRule) -> Result<BerCurve> {
    cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    simulate_curve(&pool, cfg, &Policy::Selection(rule, catalog(cfg.scheme)))
}
