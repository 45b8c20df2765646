//! Command-line front end for the beamsim link simulator.
//!
//! `sweep` writes one BER curve per modulation set, `compare` runs both
//! schemes and summarizes the SNR each needs for a target BER, and
//! `selftest` runs the fast invariant suites. Every run writes a
//! `manifest.txt` next to its CSVs that `--from-manifest` can replay.

pub mod format;
pub mod manifest;
pub mod selftest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use beamsim_core::modem::{catalog, catalog_set, Scheme};
use beamsim_core::simkit::{
    compare, snr_grid, sweep, Budget, Comparison, SchemeSummary, SelectionRule, SetSelection, SimConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use format::{curve_csv, db_or_missing, sig6, usage_csv};
use manifest::Manifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or names; exit status 2.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Sim(#[from] beamsim_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "beamsim",
    version,
    about = "MIMO beamforming link simulator: SVD versus equal-diagonal QRS precoding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BER curves for one scheme and one set or its whole catalog.
    Sweep(SweepArgs),
    /// Both schemes: fixed sets, best fixed set, selection, and SNR gaps.
    Compare(CompareArgs),
    /// Fast invariant suites; exits nonzero if any fails.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BudgetPreset {
    /// 50 bit errors or 1e5 channel uses per point.
    Fast,
    /// 200 bit errors or 2e6 channel uses per point.
    Paper,
}

impl BudgetPreset {
    pub fn budget(self) -> Budget {
        match self {
            BudgetPreset::Fast => Budget::FAST,
            BudgetPreset::Paper => Budget::PAPER,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            BudgetPreset::Fast => "fast",
            BudgetPreset::Paper => "paper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// Send every set over the same realization; keep the fewest bit errors.
    FewestErrors,
    /// Pick the set with the lowest predicted bit errors for the realization.
    ExpectedErrors,
}

impl RuleArg {
    fn rule(self) -> SelectionRule {
        match self {
            RuleArg::FewestErrors => SelectionRule::FewestErrors,
            RuleArg::ExpectedErrors => SelectionRule::ExpectedErrors,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            RuleArg::FewestErrors => "fewest-errors",
            RuleArg::ExpectedErrors => "expected-errors",
        }
    }
}

/// Inclusive SNR grid `start:stop:step` in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        snr_grid(self.start, self.stop, self.step).map_err(|e| CliError::Usage(e.to_string()))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { start: 0.0, stop: 24.0, step: 1.0 }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got `{s}`"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let g = GridSpec { start: num(start)?, stop: num(stop)?, step: num(step)? };
        snr_grid(g.start, g.stop, g.step).map_err(|e| e.to_string())?;
        Ok(g)
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: beamsim_core::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// SNR grid in dB as start:stop:step.
    #[arg(long, default_value = "0:24:1")]
    pub snr: GridSpec,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = BudgetPreset::Fast)]
    pub budget: BudgetPreset,
    /// Output directory [default: out, or the manifest's directory].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Repeat the run recorded in a manifest; other simulation flags are
    /// ignored.
    #[arg(long, value_name = "FILE")]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_scheme, required_unless_present = "from_manifest")]
    pub scheme: Option<Scheme>,
    /// A catalog set such as QAM16-QAM16, or ALL.
    #[arg(long, default_value = "ALL")]
    pub set: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, value_enum, default_value_t = RuleArg::FewestErrors)]
    pub selection: RuleArg,
    #[arg(long, default_value_t = 1e-3)]
    pub target_ber: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

/// Everything that determines a run's CSVs.
#[derive(Debug, Clone, PartialEq)]
pub enum RunSpec {
    Sweep { scheme: Scheme, set: String, sim: SimSpec },
    Compare { selection: RuleArg, target_ber: f64, sim: SimSpec },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSpec {
    pub snr: GridSpec,
    pub seed: u64,
    pub workers: usize,
    pub budget: BudgetPreset,
}

impl SimSpec {
    fn from_args(c: &CommonArgs) -> Self {
        SimSpec { snr: c.snr, seed: c.seed, workers: c.workers, budget: c.budget }
    }

    fn config(&self, scheme: Scheme) -> Result<SimConfig, CliError> {
        if self.workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        Ok(SimConfig {
            snr_grid: self.snr.points()?,
            seed: self.seed,
            budget: self.budget.budget(),
            workers: self.workers,
            ..SimConfig::new(scheme)
        })
    }

    fn record(&self, m: &mut Manifest) {
        m.set("snr", self.snr);
        m.set("seed", self.seed);
        m.set("workers", self.workers);
        m.set("budget", self.budget.as_str());
        let b = self.budget.budget();
        m.set("min_bit_errors", b.min_bit_errors);
        m.set("max_channel_uses", b.max_channel_uses);
    }

    fn from_manifest(m: &Manifest) -> Result<Self, CliError> {
        let bad = |key: &str, v: &str| CliError::Usage(format!("manifest entry {key}={v} is invalid"));
        let field = |key: &str| m.require(key);
        let snr = field("snr")?;
        let seed = field("seed")?;
        let workers = field("workers")?;
        let budget = field("budget")?;
        Ok(SimSpec {
            snr: snr.parse().map_err(|_| bad("snr", snr))?,
            seed: seed.parse().map_err(|_| bad("seed", seed))?,
            workers: workers.parse().map_err(|_| bad("workers", workers))?,
            budget: BudgetPreset::from_str(budget, true).map_err(|_| bad("budget", budget))?,
        })
    }
}

impl RunSpec {
    pub fn command(&self) -> &'static str {
        match self {
            RunSpec::Sweep { .. } => "sweep",
            RunSpec::Compare { .. } => "compare",
        }
    }

    /// The manifest body, without outputs or timestamp.
    pub fn to_manifest(&self) -> Manifest {
        let mut m = Manifest::new();
        m.set("tool", "beamsim");
        m.set("version", env!("CARGO_PKG_VERSION"));
        m.set("command", self.command());
        match self {
            RunSpec::Sweep { scheme, set, sim } => {
                m.set("scheme", scheme);
                m.set("set", set);
                sim.record(&mut m);
            }
            RunSpec::Compare { selection, target_ber, sim } => {
                m.set("selection", selection.as_str());
                m.set("target_ber", target_ber);
                sim.record(&mut m);
            }
        }
        m.set("antennas", "4x4");
        m
    }

    pub fn from_manifest(m: &Manifest) -> Result<Self, CliError> {
        let sim = SimSpec::from_manifest(m)?;
        match m.require("command")? {
            "sweep" => Ok(RunSpec::Sweep {
                scheme: parse_scheme(m.require("scheme")?).map_err(CliError::Usage)?,
                set: m.require("set")?.to_string(),
                sim,
            }),
            "compare" => {
                let selection = m.require("selection")?;
                let target = m.require("target_ber")?;
                Ok(RunSpec::Compare {
                    selection: RuleArg::from_str(selection, true)
                        .map_err(|_| CliError::Usage(format!("unknown selection rule `{selection}`")))?,
                    target_ber: target
                        .parse()
                        .map_err(|_| CliError::Usage(format!("target_ber `{target}` is not a number")))?,
                    sim,
                })
            }
            other => Err(CliError::Usage(format!("manifest command `{other}` cannot be replayed"))),
        }
    }
}

/// Resolves flags, or the manifest they point to, into a run and its output
/// directory.
fn resolve(common: &CommonArgs, from_flags: impl FnOnce() -> RunSpec) -> Result<(RunSpec, PathBuf), CliError> {
    match &common.from_manifest {
        Some(path) => {
            let spec = RunSpec::from_manifest(&Manifest::read(path)?)?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((spec, common.out.clone().unwrap_or(dir)))
        }
        None => Ok((from_flags(), common.out.clone().unwrap_or_else(|| PathBuf::from("out")))),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn finish(spec: &RunSpec, out: &Path, files: &[String]) -> Result<PathBuf, CliError> {
    let mut m = spec.to_manifest();
    m.set("out", out.display());
    for (i, f) in files.iter().enumerate() {
        m.set(&format!("output.{i}"), f);
    }
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    m.set("timestamp_unix", now);
    write_file(out, manifest::FILE_NAME, &m.to_text())
}

pub fn curve_file_name(scheme: Scheme, set: &str) -> String {
    format!("{scheme}_{set}.csv")
}

/// Runs a sweep or compare and writes its files. Returns the summary text
/// to print.
pub fn execute(spec: &RunSpec, out: &Path) -> Result<String, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match spec {
        RunSpec::Sweep { scheme, set, sim } => {
            let mut cfg = sim.config(*scheme)?;
            if set != "ALL" {
                cfg.sets = SetSelection::One(catalog_set(*scheme, set).map_err(|e| CliError::Usage(e.to_string()))?);
            }
            let curves = sweep(&cfg)?;
            let mut files = Vec::new();
            let mut text = String::new();
            for c in &curves {
                let name = curve_file_name(c.scheme, &c.set);
                write_file(out, &name, &curve_csv(c))?;
                writeln!(text, "wrote {}", out.join(&name).display()).expect("writing to a String");
                files.push(name);
            }
            finish(spec, out, &files)?;
            Ok(text)
        }
        RunSpec::Compare { selection, target_ber, sim } => {
            if !(*target_ber > 0.0 && *target_ber < 1.0) {
                return Err(CliError::Usage(format!("--target-ber must be in (0, 1), got {target_ber}")));
            }
            let cmp = compare(&sim.config(Scheme::Svd)?, selection.rule(), *target_ber)?;
            let mut files = Vec::new();
            for s in [&cmp.svd, &cmp.qrs] {
                files.extend(write_scheme(out, s)?);
            }
            let table = summary_csv(&cmp);
            write_file(out, "summary.csv", &table)?;
            files.push("summary.csv".into());
            let text = summary_text(&cmp, *selection);
            write_file(out, "summary.txt", &text)?;
            files.push("summary.txt".into());
            finish(spec, out, &files)?;
            Ok(text)
        }
    }
}

fn write_scheme(out: &Path, s: &SchemeSummary) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    let mut emit = |name: String, body: String| -> Result<(), CliError> {
        write_file(out, &name, &body)?;
        files.push(name);
        Ok(())
    };
    for c in &s.fixed {
        emit(curve_file_name(s.scheme, &c.set), curve_csv(c))?;
    }
    if let Some(best) = s.best_fixed_curve() {
        emit(format!("{}_best_fixed.csv", s.scheme), curve_csv(best))?;
    }
    emit(format!("{}_envelope.csv", s.scheme), curve_csv(&s.envelope))?;
    emit(format!("{}_selection.csv", s.scheme), curve_csv(&s.selection))?;
    let names: Vec<String> = catalog(s.scheme).iter().map(|c| c.name()).collect();
    emit(format!("{}_selection_usage.csv", s.scheme), usage_csv(&s.selection, &names))?;
    Ok(files)
}

/// Rows of the compare summary: quantity, value in dB (or `not bracketed`),
/// and what it refers to.
pub fn summary_rows(cmp: &Comparison) -> Vec<(String, Option<f64>, String)> {
    let mut rows = Vec::new();
    for s in [&cmp.svd, &cmp.qrs] {
        let best = s.best_fixed_curve().map_or_else(|| "none".to_string(), |c| c.set.clone());
        rows.push((format!("snr_{}_best_fixed", s.scheme), s.best_fixed_snr(), best));
    }
    for s in [&cmp.svd, &cmp.qrs] {
        rows.push((format!("snr_{}_selection", s.scheme), s.selection_snr, "per-realization selection".into()));
    }
    for s in [&cmp.svd, &cmp.qrs] {
        rows.push((format!("snr_{}_envelope", s.scheme), s.envelope_snr, "pointwise minimum over fixed sets".into()));
    }
    let g = &cmp.gaps;
    rows.push(("gap_fixed".into(), g.fixed, "svd best fixed - qrs best fixed; positive = QRS better".into()));
    rows.push(("gap_selection".into(), g.selection, "qrs selection - svd selection; positive = SVD better".into()));
    rows.push(("gain_svd_selection".into(), g.svd_selection_gain, "svd QAM16-QAM16 - svd selection".into()));
    rows.push(("gain_qrs_selection".into(), g.qrs_selection_gain, "qrs QAM16-QAM16 - qrs selection".into()));
    rows.push(("gap_envelope".into(), g.envelope, "qrs envelope - svd envelope; positive = SVD better".into()));
    rows.push(("gain_svd_envelope".into(), g.svd_envelope_gain, "svd QAM16-QAM16 - svd envelope".into()));
    rows.push(("gain_qrs_envelope".into(), g.qrs_envelope_gain, "qrs QAM16-QAM16 - qrs envelope".into()));
    for s in [&cmp.svd, &cmp.qrs] {
        for (c, snr) in s.fixed.iter().zip(&s.fixed_snr) {
            rows.push((format!("snr_{}_{}", s.scheme, c.set), *snr, "fixed set".into()));
        }
    }
    rows
}

pub fn summary_csv(cmp: &Comparison) -> String {
    let mut out = String::from("quantity,value_db,detail\n");
    for (q, v, d) in summary_rows(cmp) {
        writeln!(out, "{q},{},{d}", db_or_missing(v)).expect("writing to a String");
    }
    out
}

pub fn summary_text(cmp: &Comparison, rule: RuleArg) -> String {
    let mut out = format!("SNR (dB) at BER {} — selection rule {}\n", sig6(cmp.target_ber), rule.as_str());
    let rows = summary_rows(cmp);
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (q, v, d) in rows {
        writeln!(out, "  {q:<width$}  {:>14}  {d}", db_or_missing(v)).expect("writing to a String");
    }
    out
}

/// Runs the self-test suites, printing one line each. Returns whether all
/// passed.
pub fn run_selftest(args: &SelftestArgs) -> Result<bool, CliError> {
    if args.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let reports = selftest::run_all(args.seed, args.workers);
    for r in &reports {
        println!("{r}");
    }
    Ok(reports.iter().all(|r| r.passed))
}

/// Entry point shared by the binary and tests. Returns the exit status.
pub fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Sweep(a) => {
            let (spec, out) = resolve(&a.common, || RunSpec::Sweep {
                scheme: a.scheme.expect("required by clap without a manifest"),
                set: a.set.clone(),
                sim: SimSpec::from_args(&a.common),
            })?;
            print!("{}", execute(&spec, &out)?);
            Ok(0)
        }
        Command::Compare(a) => {
            let (spec, out) = resolve(&a.common, || RunSpec::Compare {
                selection: a.selection,
                target_ber: a.target_ber,
                sim: SimSpec::from_args(&a.common),
            })?;
            print!("{}", execute(&spec, &out)?);
            Ok(0)
        }
        Command::Selftest(a) => Ok(if run_selftest(&a)? { 0 } else { 1 }),
    }
}
