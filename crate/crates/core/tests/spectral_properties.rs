mod common;

use std::f64::consts::PI;

use common::band_mean;
use proptest::prelude::*;
use spinaxion_core::physics::{axion_frequency, larmor_frequency, sigma_x_trace};
use spinaxion_core::spectral::{
    detect_sidebands, dynamic_snr, estimate_psd, lower_sideband_bands, DynamicSnrOptions, Window,
};
use spinaxion_core::{compose_noise, AxionParams, NoiseConfig, QubitConfig, TimeGrid, Trace, TraceKind};

fn benchmark_grid() -> TimeGrid {
    TimeGrid::new(2e-12, 90_000, 0.0).unwrap()
}

/// Power-series Bessel function of the first kind.
fn bessel_series(n: u32, x: f64) -> f64 {
    let mut term = (0.5 * x).powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..60 {
        term *= -(0.25 * x * x) / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}

fn fm_tone(grid: &TimeGrid, f0: f64, fa: f64, beta: f64) -> Trace {
    let v = grid
        .times()
        .map(|t| (2.0 * PI * f0 * t + beta * (2.0 * PI * fa * t).sin()).cos())
        .collect();
    Trace::new(*grid, v, TraceKind::Other).unwrap()
}

#[test]
fn parseval_holds_for_every_window() {
    let g = benchmark_grid();
    let noise = compose_noise(&g, &NoiseConfig { pink_amp: 0.0, drift_amp: 0.0, ..NoiseConfig::default() }).unwrap();
    let x = fm_tone(&g, 14e9, 725e6, 0.3).add(&noise).unwrap();
    let ms = x.mean_square();
    for w in [Window::Hann, Window::Rectangular, Window::Hamming, Window::Blackman] {
        for (seg, ov) in [(90_000, 0.0), (9000, 0.5), (4096, 0.25)] {
            let p = estimate_psd(&x, w, seg, ov).unwrap();
            let rel = p.total_power() / ms - 1.0;
            assert!(rel.abs() < 0.01, "{w:?} seg {seg}: {rel}");
        }
    }
}

#[test]
fn white_noise_density_is_flat() {
    let g = TimeGrid::new(2e-12, 1 << 17, 0.0).unwrap();
    let sigma = 1e-3;
    let x = compose_noise(&g, &NoiseConfig { white_amp: sigma, ..NoiseConfig::silent() }).unwrap();
    let p = estimate_psd(&x, Window::Hann, 1024, 0.0).unwrap();
    assert_eq!(p.n_segments, 128);
    let level = sigma * sigma / g.nyquist();
    let nyq = g.nyquist();
    for k in 0..10 {
        let (lo, hi) = (nyq * k as f64 / 10.0 + 1.0, nyq * (k + 1) as f64 / 10.0 - 1.0);
        let m = band_mean(&p, lo, hi);
        assert!((m / level - 1.0).abs() < 0.05, "band {k}: {}", m / level);
    }
}

#[test]
fn benchmark_trace_peaks_at_the_carrier() {
    let g = benchmark_grid();
    let (a, q) = (AxionParams::default(), QubitConfig::default());
    let x = sigma_x_trace(&a, &q, &g, 1e18).unwrap();
    let p = estimate_psd(&x, Window::Hann, g.n_samples(), 0.0).unwrap();
    assert!((p.frequencies[p.peak_bin()] - larmor_frequency(&q)).abs() <= p.bin_width());
    assert!((p.bin_width() - 5.5556e6).abs() < 1e3);
    let r = detect_sidebands(&p, larmor_frequency(&q), axion_frequency(&a), 2).unwrap();
    for side in [-1, 1] {
        let s = r.get(1, side).unwrap();
        assert!(s.found);
        assert!((s.line.frequency - s.predicted).abs() <= p.bin_width());
    }
}

#[test]
fn unmodulated_carrier_has_no_sidebands() {
    let g = benchmark_grid();
    let a = AxionParams::default().with_coupling(0.0);
    let q = QubitConfig::default();
    let x = sigma_x_trace(&a, &q, &g, 1e18).unwrap();
    for w in [Window::Hann, Window::Rectangular] {
        let p = estimate_psd(&x, w, g.n_samples(), 0.0).unwrap();
        let r = detect_sidebands(&p, 14e9, axion_frequency(&a), 3).unwrap();
        assert!(!r.any_found(), "{w:?}: {:?}", r.sidebands.iter().filter(|s| s.found).collect::<Vec<_>>());
    }
}

#[test]
fn physical_depth_produces_no_sidebands() {
    let g = benchmark_grid();
    let a = AxionParams::default();
    let x = sigma_x_trace(&a, &QubitConfig::default(), &g, 1.0).unwrap();
    let p = estimate_psd(&x, Window::Hann, g.n_samples(), 0.0).unwrap();
    assert!(!detect_sidebands(&p, 14e9, axion_frequency(&a), 2).unwrap().any_found());
}

#[test]
fn bessel_ratio_at_half() {
    let g = benchmark_grid();
    let fa = axion_frequency(&AxionParams::default());
    let p = estimate_psd(&fm_tone(&g, 14e9, fa, 0.5), Window::Hann, g.n_samples(), 0.0).unwrap();
    let r = detect_sidebands(&p, 14e9, fa, 1).unwrap();
    let want = (bessel_series(1, 0.5) / bessel_series(0, 0.5)).powi(2);
    assert!((want - 0.066_642_785_195_323_64).abs() < 1e-12);
    for side in [-1, 1] {
        let got = r.get(1, side).unwrap().line.power / r.carrier.power;
        assert!((got / want - 1.0).abs() < 0.05, "side {side}: {got} vs {want}");
    }
    let lo = r.get(1, -1).unwrap().line.power;
    let hi = r.get(1, 1).unwrap().line.power;
    assert!((lo / hi - 1.0).abs() < 0.01);
}

#[test]
fn sideband_offset_tracks_axion_mass() {
    let g = benchmark_grid();
    let q = QubitConfig::default();
    let a1 = AxionParams { m_a: 2e-6, ..AxionParams::default() };
    let a2 = AxionParams { m_a: 4e-6, ..AxionParams::default() };
    assert_eq!(axion_frequency(&a2), 2.0 * axion_frequency(&a1));
    for a in [a1, a2] {
        let x = sigma_x_trace(&a, &q, &g, 1e18).unwrap();
        let p = estimate_psd(&x, Window::Hann, g.n_samples(), 0.0).unwrap();
        let r = detect_sidebands(&p, 14e9, axion_frequency(&a), 1).unwrap();
        for side in [-1, 1] {
            let s = r.get(1, side).unwrap();
            assert!(s.found);
            let offset = (s.line.frequency - 14e9).abs();
            assert!((offset - axion_frequency(&a)).abs() <= p.bin_width());
        }
    }
}

#[test]
fn pure_noise_rarely_shows_sidebands() {
    let g = benchmark_grid();
    let fa = axion_frequency(&AxionParams::default());
    let clean = (0..100u64)
        .filter(|&seed| {
            let x = compose_noise(&g, &NoiseConfig::default().with_seed(seed)).unwrap();
            let p = estimate_psd(&x, Window::Hann, 9000, 0.5).unwrap();
            !detect_sidebands(&p, 14e9, fa, 1).unwrap().any_found()
        })
        .count();
    assert!(clean >= 95, "{clean}/100 seeds clean");
}

#[test]
fn noise_only_dynamic_snr_is_not_positive() {
    let g = benchmark_grid();
    let fa = axion_frequency(&AxionParams::default());
    let (sb, nb) = lower_sideband_bands(14e9, fa);
    let means: Vec<f64> = (0..100u64)
        .map(|seed| {
            let x = compose_noise(&g, &NoiseConfig::default().with_seed(seed)).unwrap();
            dynamic_snr(&x, 100, sb, nb, DynamicSnrOptions::default()).unwrap().mean_db()
        })
        .collect();
    let n = means.len() as f64;
    let grand = means.iter().sum::<f64>() / n;
    let se = (means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    // One-sided 1 % test against a positive mean.
    assert!(grand <= 2.33 * se, "mean {grand} dB, standard error {se}");
}

#[test]
fn dynamic_snr_ignores_global_gain() {
    let g = benchmark_grid();
    let a = AxionParams::default();
    let clean = sigma_x_trace(&a, &QubitConfig::default(), &g, 1e18).unwrap();
    let x = clean.add(&compose_noise(&g, &NoiseConfig::default()).unwrap()).unwrap();
    let (sb, nb) = lower_sideband_bands(14e9, axion_frequency(&a));
    let base = dynamic_snr(&x, 100, sb, nb, DynamicSnrOptions::default()).unwrap();
    let scaled = dynamic_snr(&x.map(TraceKind::Other, |v| 37.5 * v), 100, sb, nb, DynamicSnrOptions::default()).unwrap();
    for (u, v) in base.db.iter().zip(&scaled.db) {
        assert!((u - v).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fm_sideband_ratio_follows_bessel(beta in 0.1f64..1.2, f0 in 10e9f64..20e9, fa in 0.4e9f64..1.5e9) {
        let g = benchmark_grid();
        let p = estimate_psd(&fm_tone(&g, f0, fa, beta), Window::Hann, g.n_samples(), 0.0).unwrap();
        let r = detect_sidebands(&p, f0, fa, 1).unwrap();
        let want = (bessel_series(1, beta) / bessel_series(0, beta)).powi(2);
        for side in [-1, 1] {
            let s = r.get(1, side).unwrap();
            prop_assert!(s.found);
            let got = s.line.power / r.carrier.power;
            prop_assert!((got / want - 1.0).abs() < 0.05, "beta {} side {}: {} vs {}", beta, side, got, want);
        }
    }
}
