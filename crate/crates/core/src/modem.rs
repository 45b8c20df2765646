//! Gray-labelled QAM constellations and the 8 bit/channel-use modulation sets.
//!
//! Every constellation is a rectangular grid of odd integer levels with an
//! independent reflected Gray code on each axis. The in-phase bits form the
//! high part of the label. Points are stored in grid order (in-phase level
//! major, both axes ascending), so the lowest index wins exact ties.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstellationName {
    Qpsk,
    Qam8,
    Qam16,
    Qam64,
}

impl ConstellationName {
    pub const ALL: [ConstellationName; 4] = [Self::Qpsk, Self::Qam8, Self::Qam16, Self::Qam64];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Qpsk => "QPSK",
            Self::Qam8 => "QAM8",
            Self::Qam16 => "QAM16",
            Self::Qam64 => "QAM64",
        }
    }

    /// Bits carried on the in-phase and quadrature axes.
    fn axis_bits(self) -> (u32, u32) {
        match self {
            Self::Qpsk => (1, 1),
            Self::Qam8 => (2, 1),
            Self::Qam16 => (2, 2),
            Self::Qam64 => (3, 3),
        }
    }

    pub fn bits_per_symbol(self) -> u32 {
        let (i, q) = self.axis_bits();
        i + q
    }
}

impl fmt::Display for ConstellationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstellationName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown constellation {s:?}")))
    }
}

/// Unit-energy rectangular QAM alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    name: ConstellationName,
    points: Vec<Complex64>,
    labels: Vec<u8>,
    index_of_label: Vec<usize>,
    i_levels: usize,
    q_levels: usize,
    scale: f64,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

impl Constellation {
    pub fn new(name: ConstellationName) -> Self {
        let (ib, qb) = name.axis_bits();
        let (il, ql) = (1usize << ib, 1usize << qb);
        let level = |k: usize, count: usize| 2.0 * k as f64 - (count as f64 - 1.0);
        let mean_energy = (il * il - 1) as f64 / 3.0 + (ql * ql - 1) as f64 / 3.0;
        let scale = mean_energy.sqrt().recip();

        let mut points = Vec::with_capacity(il * ql);
        let mut labels = Vec::with_capacity(il * ql);
        for ki in 0..il {
            for kq in 0..ql {
                points.push(Complex64::new(level(ki, il), level(kq, ql)) * scale);
                labels.push(((gray(ki) << qb) | gray(kq)) as u8);
            }
        }
        let mut index_of_label = vec![0; points.len()];
        for (idx, &label) in labels.iter().enumerate() {
            index_of_label[label as usize] = idx;
        }
        Constellation { name, points, labels, index_of_label, i_levels: il, q_levels: ql, scale }
    }

    pub fn name(&self) -> ConstellationName {
        self.name
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.name.bits_per_symbol()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Label of each point, MSB first within `bits_per_symbol` bits.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> u8 {
        self.labels[index]
    }

    /// Point carrying the given label.
    pub fn point_for_label(&self, label: u8) -> Complex64 {
        self.points[self.index_of_label[label as usize]]
    }

    /// Minimum distance between two points.
    pub fn min_distance(&self) -> f64 {
        2.0 * self.scale
    }

    /// Average number of nearest neighbours per point.
    pub fn mean_neighbours(&self) -> f64 {
        let axis = |l: usize| 2.0 * (l as f64 - 1.0) / l as f64;
        axis(self.i_levels) + axis(self.q_levels)
    }

    /// Maps `bits` (one bit per entry, MSB first) to its point.
    pub fn modulate(&self, bits: &[u8]) -> Result<Complex64> {
        if bits.len() != self.bits_per_symbol() as usize {
            return Err(Error::invalid(format!(
                "{} expects {} bits, got {}",
                self.name,
                self.bits_per_symbol(),
                bits.len()
            )));
        }
        let mut label = 0u8;
        for &b in bits {
            if b > 1 {
                return Err(Error::invalid(format!("bit value {b}")));
            }
            label = (label << 1) | b;
        }
        Ok(self.point_for_label(label))
    }

    /// Bits of the point at `index`, MSB first.
    pub fn demap(&self, index: usize) -> Vec<u8> {
        let k = self.bits_per_symbol();
        let label = self.labels[index];
        (0..k).rev().map(|b| (label >> b) & 1).collect()
    }

    /// Index of the closest point; ties go to the lowest index.
    pub fn nearest_point(&self, z: Complex64) -> usize {
        let ki = slice_axis(z.re / self.scale, self.i_levels);
        let kq = slice_axis(z.im / self.scale, self.q_levels);
        ki * self.q_levels + kq
    }
}

/// Nearest level index of `x` on the grid `{-(L-1), .., -1, 1, .., L-1}`,
/// preferring the lower level on a midpoint.
fn slice_axis(x: f64, levels: usize) -> usize {
    let t = (x + (levels as f64 - 1.0)) / 2.0;
    let k = (t - 0.5).ceil();
    if k <= 0.0 {
        0
    } else if k >= (levels - 1) as f64 {
        levels - 1
    } else {
        k as usize
    }
}

/// Free-function form of [`Constellation::new`] from a textual name.
pub fn build_constellation(name: &str) -> Result<Constellation> {
    Ok(Constellation::new(name.parse()?))
}

/// Precoding scheme a modulation set is listed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Svd,
    Qrs,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Svd, Scheme::Qrs];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Svd => "svd",
            Scheme::Qrs => "qrs",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svd" => Ok(Scheme::Svd),
            "qrs" => Ok(Scheme::Qrs),
            _ => Err(Error::invalid(format!("unknown scheme {s:?} (expected svd or qrs)"))),
        }
    }
}

/// Ordered per-stream constellation assignment, stream 1 first.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationSet {
    streams: Vec<Constellation>,
}

/// Spectral efficiency of every catalog set, in bits per channel use.
pub const CATALOG_BITS: u32 = 8;

/// Largest supported stream count.
pub const MAX_STREAMS: usize = 4;

impl ModulationSet {
    pub fn new(names: &[ConstellationName]) -> Result<Self> {
        if names.is_empty() || names.len() > MAX_STREAMS {
            return Err(Error::invalid(format!(
                "a modulation set needs 1 to {MAX_STREAMS} streams, got {}",
                names.len()
            )));
        }
        Ok(ModulationSet { streams: names.iter().map(|&n| Constellation::new(n)).collect() })
    }

    /// Canonical name, e.g. `QAM64-QPSK`.
    pub fn name(&self) -> String {
        self.streams.iter().map(|c| c.name().as_str()).collect::<Vec<_>>().join("-")
    }

    pub fn streams(&self) -> &[Constellation] {
        &self.streams
    }

    pub fn stream_count(&self) -> usize {
        self.streams.len()
    }

    pub fn total_bits(&self) -> u32 {
        self.streams.iter().map(|c| c.bits_per_symbol()).sum()
    }
}

impl fmt::Display for ModulationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ModulationSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let names = s.split('-').map(str::parse).collect::<Result<Vec<ConstellationName>>>()?;
        Self::new(&names)
    }
}

/// The four 8 bit/channel-use sets offered to each scheme, in listing order.
pub fn catalog(scheme: Scheme) -> Vec<ModulationSet> {
    use ConstellationName::*;
    let lists: [&[ConstellationName]; 4] = match scheme {
        Scheme::Svd => [&[Qam64, Qpsk], &[Qam16, Qam16], &[Qam16, Qpsk, Qpsk], &[Qam8, Qam8, Qpsk]],
        Scheme::Qrs => [&[Qam16, Qam16], &[Qam16, Qpsk, Qpsk], &[Qam8, Qam8, Qpsk], &[Qpsk, Qpsk, Qpsk, Qpsk]],
    };
    lists.iter().map(|names| ModulationSet::new(names).expect("catalog sets are valid")).collect()
}

/// Looks a set up by canonical name in a scheme's catalog.
pub fn catalog_set(scheme: Scheme, name: &str) -> Result<ModulationSet> {
    let wanted: ModulationSet = name.parse()?;
    catalog(scheme).into_iter().find(|s| *s == wanted).ok_or_else(|| {
        let valid: Vec<String> = catalog(scheme).iter().map(|s| s.name()).collect();
        Error::invalid(format!("{name} is not in the {scheme} catalog; valid sets: {}", valid.join(", ")))
    })
}
