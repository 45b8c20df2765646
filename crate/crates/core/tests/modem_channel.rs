mod common;

use beamsim_core::channel::{add_noise, draw_channel, RandomStream};
use beamsim_core::decomp::{qrs_beamformer, svd_beamformer};
use beamsim_core::matcore::svd;
use beamsim_core::modem::{build_constellation, catalog, ConstellationName, Scheme};
use beamsim_core::Complex64;
use common::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn nearest_point_agrees_with_exhaustive_search() {
    let mut rng = test_rng(200);
    for name in ConstellationName::ALL {
        let c = build_constellation(name.as_str()).unwrap();
        for _ in 0..10_000 {
            let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let fast = c.nearest_point(z);
            let slow = brute_nearest(c.points(), z);
            // Equidistant ties may resolve either way; the distances must agree.
            assert!(((z - c.points()[fast]).norm() - (z - c.points()[slow]).norm()).abs() < 1e-12, "{name:?} at {z}");
        }
    }
}

#[test]
fn every_constellation_has_unit_energy_and_gray_neighbours() {
    for name in ConstellationName::ALL {
        let c = build_constellation(name.as_str()).unwrap();
        let energy: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.points().len() as f64;
        assert!((energy - 1.0).abs() < 1e-12);
        let dmin = c.min_distance();
        for (i, p) in c.points().iter().enumerate() {
            for (j, q) in c.points().iter().enumerate() {
                if i != j && ((p - q).norm() - dmin).abs() < 1e-9 {
                    assert_eq!((c.label(i) ^ c.label(j)).count_ones(), 1, "{name:?} {i} {j}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn modulate_demap_round_trip(label in 0u8..64, which in 0usize..4) {
        let c = build_constellation(ConstellationName::ALL[which].as_str()).unwrap();
        let m = c.bits_per_symbol();
        let label = label % (1u8 << m);
        let bits: Vec<u8> = (0..m).rev().map(|b| (label >> b) & 1).collect();
        let point = c.modulate(&bits).unwrap();
        let idx = c.nearest_point(point);
        prop_assert_eq!(c.demap(idx), bits);
    }

    #[test]
    fn small_noise_never_changes_the_decision(idx in 0usize..64, which in 0usize..4, angle in 0.0f64..6.3) {
        let c = build_constellation(ConstellationName::ALL[which].as_str()).unwrap();
        let idx = idx % c.points().len();
        let z = c.points()[idx] + Complex64::from_polar(0.49 * c.min_distance(), angle);
        prop_assert_eq!(c.nearest_point(z), idx);
    }
}

#[test]
fn rayleigh_power_matches_antenna_product() {
    let mut rng = RandomStream::new(7, 0);
    let trials = 10_000;
    let mut total = 0.0;
    for _ in 0..trials {
        let h = draw_channel(&mut rng, 4, 4).h;
        total += svd(&h).unwrap().deltas.iter().map(|d| d * d).sum::<f64>();
    }
    let mean = total / trials as f64;
    assert!((mean - 16.0).abs() < 0.02 * 16.0, "mean sum of squared singular values {mean}");
}

#[test]
fn substreams_are_uncorrelated() {
    let mut a = RandomStream::new(42, 0);
    let mut b = RandomStream::new(42, 1);
    let n = 100_000;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n).map(|_| (a.standard_normal(), b.standard_normal())).unzip();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n as f64;
    let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    let corr = cov / (var(&xs, mx) * var(&ys, my)).sqrt();
    assert!(corr.abs() < 0.01, "correlation {corr}");
}

#[test]
fn noise_power_matches_sigma2() {
    let mut rng = RandomStream::new(8, 3);
    let sigma2 = 0.37;
    let y = add_noise(&vec![Complex64::new(0.0, 0.0); 200_000], sigma2, &mut rng).unwrap();
    let p = y.iter().map(|w| w.norm_sqr()).sum::<f64>() / y.len() as f64;
    assert!((p - sigma2).abs() < 0.01 * sigma2, "{p}");
}

#[test]
fn transmit_energy_is_normalized() {
    // ||x||^2 with x = P * u / sqrt(n), P = V_n or S, averages to 1 for every
    // catalog set.
    let mut rng = RandomStream::new(9, 0);
    for scheme in Scheme::ALL {
        for set in catalog(scheme) {
            let n = set.stream_count();
            let trials = 10_000;
            let mut energy = 0.0;
            for _ in 0..trials {
                let h = draw_channel(&mut rng, 4, 4).h;
                let v = match scheme {
                    Scheme::Svd => svd_beamformer(&h, n).unwrap().v_n,
                    Scheme::Qrs => qrs_beamformer(&h, n).unwrap().s,
                };
                let u: Vec<Complex64> = set
                    .streams()
                    .iter()
                    .map(|c| {
                        let k = (rng.uniform() * c.points().len() as f64) as usize;
                        c.points()[k] / (n as f64).sqrt()
                    })
                    .collect();
                energy += v.mul_vec(&u).unwrap().iter().map(|x| x.norm_sqr()).sum::<f64>();
            }
            let mean = energy / trials as f64;
            assert!((mean - 1.0).abs() < 0.01, "{} {}: {mean}", scheme, set.name());
        }
    }
}
