#![allow(dead_code)]

use spinaxion_core::spectral::Psd;

/// Mean PSD over `[lo, hi)` Hz.
pub fn band_mean(psd: &Psd, lo: f64, hi: f64) -> f64 {
    let vals: Vec<f64> = psd
        .frequencies
        .iter()
        .zip(&psd.power)
        .filter(|(f, _)| **f >= lo && **f < hi)
        .map(|(_, p)| *p)
        .collect();
    assert!(!vals.is_empty(), "no bins in [{lo}, {hi})");
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// `n` log-spaced band edges from `lo` to `hi`.
pub fn log_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo * (hi / lo).powf(i as f64 / n as f64))
        .collect()
}

/// Least-squares slope of log10(PSD) against log10(f) over log-spaced bands.
pub fn loglog_slope(psd: &Psd, lo: f64, hi: f64, bands: usize) -> f64 {
    let edges = log_edges(lo, hi, bands);
    let pts: Vec<(f64, f64)> = edges
        .windows(2)
        .map(|w| ((w[0] * w[1]).sqrt().log10(), band_mean(psd, w[0], w[1]).log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Pearson correlation at lag 0.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}
