//! Power spectral density estimation, sideband detection, cumulative power
//! and windowed (dynamic) SNR.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::filter::{design_bandpass, filter_zero_phase, BandpassSpec};
use crate::trace::Trace;

/// Value reported when the noise-band variance is zero.
pub const SATURATED_DB: f64 = 300.0;

/// Value reported for an amplitude ratio of zero.
pub const FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
    Hamming,
    Blackman,
}

impl Window {
    /// Periodic (DFT-even) coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let m = n as f64;
        (0..n)
            .map(|i| {
                let x = 2.0 * PI * i as f64 / m;
                match self {
                    Window::Hann => 0.5 - 0.5 * x.cos(),
                    Window::Rectangular => 1.0,
                    Window::Hamming => 0.54 - 0.46 * x.cos(),
                    Window::Blackman => 0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos(),
                }
            })
            .collect()
    }
}

/// One-sided power spectral density (units²/Hz) on `0..=Nyquist`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    pub window: Window,
    pub segment_len: usize,
    pub overlap: f64,
    pub n_segments: usize,
    pub sample_rate: f64,
}

impl Psd {
    pub fn bin_width(&self) -> f64 {
        self.sample_rate / self.segment_len as f64
    }

    /// Index of the bin nearest `f`, clamped to the grid.
    pub fn bin_of(&self, f: f64) -> usize {
        let k = (f / self.bin_width()).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.power.len() - 1)
        }
    }

    /// `Σ P·Δf`, which equals the mean square of the input for stationary data.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.bin_width()
    }

    /// Integrated power over bins `lo..=hi`.
    pub fn band_power(&self, lo: usize, hi: usize) -> f64 {
        let hi = hi.min(self.power.len() - 1);
        self.power[lo..=hi].iter().sum::<f64>() * self.bin_width()
    }

    /// Bin of the global maximum, ignoring DC.
    pub fn peak_bin(&self) -> usize {
        (1..self.power.len())
            .max_by(|&a, &b| self.power[a].total_cmp(&self.power[b]))
            .unwrap_or(0)
    }
}

/// Welch estimate: `segment_len`-sample segments, fractional `overlap`,
/// no detrending, density scaling `|X|² / (fs·Σw²)` folded to one side.
/// Segments are accumulated in time order.
pub fn estimate_psd(x: &Trace, window: Window, segment_len: usize, overlap: f64) -> Result<Psd> {
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptyTrace);
    }
    if segment_len < 2 || segment_len > n {
        return Err(invalid(
            "psd.segment_len",
            format!("must lie in [2, {n}] for a {n}-sample trace, got {segment_len}"),
        ));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(invalid("psd.overlap", format!("must lie in [0, 1), got {overlap}")));
    }
    let step = (segment_len - (overlap * segment_len as f64).round() as usize).max(1);
    let n_segments = (n - segment_len) / step + 1;
    let w = window.coefficients(segment_len);
    let fs = x.sample_rate();
    let scale = 1.0 / (fs * w.iter().map(|v| v * v).sum::<f64>());

    let fft = FftPlanner::new().plan_fft_forward(segment_len);
    let n_bins = segment_len / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    for s in 0..n_segments {
        let seg = &x.values[s * step..s * step + segment_len];
        for ((b, v), wi) in buf.iter_mut().zip(seg).zip(&w) {
            *b = Complex64::new(v * wi, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
    }
    let nyquist_bin = (segment_len % 2 == 0).then_some(n_bins - 1);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let fold = if k == 0 || Some(k) == nyquist_bin { 1.0 } else { 2.0 };
            fold * a * scale / n_segments as f64
        })
        .collect();
    let df = fs / segment_len as f64;
    Ok(Psd {
        frequencies: (0..n_bins).map(|k| k as f64 * df).collect(),
        power,
        window,
        segment_len,
        overlap,
        n_segments,
        sample_rate: fs,
    })
}

/// Single full-length rectangular periodogram.
pub fn periodogram(x: &Trace) -> Result<Psd> {
    estimate_psd(x, Window::Rectangular, x.len(), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    /// Half-width of the local-maximum search around each predicted line (bins).
    pub search_bins: usize,
    /// Half-width of the power integration around the maximum (bins).
    pub integrate_bins: usize,
    /// Half-width of the neighbourhood used for the noise floor (bins).
    pub floor_bins: usize,
    /// Minimum prominence over the local floor (dB).
    pub threshold_db: f64,
    /// Lines weaker than this fraction of the carrier power are treated as
    /// rounding residue.
    pub min_relative_power: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            search_bins: 2,
            integrate_bins: 2,
            floor_bins: 32,
            threshold_db: 3.0,
            min_relative_power: 1e-24,
        }
    }
}

/// A located spectral line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub frequency: f64,
    /// Integrated power around the maximum (units²).
    pub power: f64,
    /// Mean density over the integration window relative to the floor (dB).
    pub prominence_db: f64,
    /// Local floor density (units²/Hz).
    pub floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sideband {
    pub order: usize,
    /// +1 for the upper, −1 for the lower sideband.
    pub side: i8,
    pub predicted: f64,
    pub found: bool,
    /// Best candidate in the search window; meaningful only when `found`.
    pub line: Line,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandReport {
    pub carrier: Line,
    pub sidebands: Vec<Sideband>,
    /// Median density over the analysed span with all lines excluded (units²/Hz).
    pub noise_floor: f64,
    pub bin_width: f64,
}

impl SidebandReport {
    pub fn get(&self, order: usize, side: i8) -> Option<&Sideband> {
        self.sidebands.iter().find(|s| s.order == order && s.side == side)
    }

    pub fn any_found(&self) -> bool {
        self.sidebands.iter().any(|s| s.found)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

struct LineFinder<'a> {
    psd: &'a Psd,
    opts: DetectOptions,
    excluded: Vec<(usize, usize)>,
}

impl LineFinder<'_> {
    fn is_excluded(&self, k: usize) -> bool {
        self.excluded.iter().any(|&(lo, hi)| k >= lo && k <= hi)
    }

    fn measure(&self, predicted: f64) -> Line {
        let p = &self.psd.power;
        let last = p.len() - 1;
        let centre = self.psd.bin_of(predicted);
        let lo = centre.saturating_sub(self.opts.search_bins).max(1);
        let hi = (centre + self.opts.search_bins).min(last);
        let peak = (lo..=hi).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(centre);

        let (ilo, ihi) = (
            peak.saturating_sub(self.opts.integrate_bins),
            (peak + self.opts.integrate_bins).min(last),
        );
        let power = self.psd.band_power(ilo, ihi);
        let mean_density = power / ((ihi - ilo + 1) as f64 * self.psd.bin_width());

        let (flo, fhi) = (
            centre.saturating_sub(self.opts.floor_bins).max(1),
            (centre + self.opts.floor_bins).min(last),
        );
        let floor = median((flo..=fhi).filter(|&k| !self.is_excluded(k)).map(|k| p[k]).collect());
        let prominence_db = if floor > 0.0 {
            10.0 * (mean_density / floor).log10()
        } else if mean_density > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        Line {
            frequency: self.psd.frequencies[peak],
            power,
            prominence_db,
            floor,
        }
    }
}

/// Locates the carrier and the sidebands `f_main ± n·f_axion`, `n = 1..=n_max`.
pub fn detect_sidebands(psd: &Psd, f_main: f64, f_axion: f64, n_max: usize) -> Result<SidebandReport> {
    detect_sidebands_with(psd, f_main, f_axion, n_max, DetectOptions::default())
}

pub fn detect_sidebands_with(
    psd: &Psd,
    f_main: f64,
    f_axion: f64,
    n_max: usize,
    opts: DetectOptions,
) -> Result<SidebandReport> {
    let df = psd.bin_width();
    let nyquist = psd.sample_rate / 2.0;
    if !(f_main > 0.0 && f_main < nyquist) {
        return Err(Error::Nyquist {
            what: "f_main".into(),
            frequency: f_main,
            nyquist,
        });
    }
    let guard = opts.search_bins + opts.integrate_bins + 1;
    if !(f_axion >= 2.0 * guard as f64 * df) {
        return Err(invalid(
            "f_axion",
            format!(
                "{f_axion:.4e} Hz is not resolvable at {df:.4e} Hz bins; need >= {:.4e} Hz",
                2.0 * guard as f64 * df
            ),
        ));
    }

    // Exclude every predicted line (one order beyond n_max too) from floors.
    let mut excluded = Vec::new();
    for k in -(n_max as i64 + 1)..=(n_max as i64 + 1) {
        let f = f_main + k as f64 * f_axion;
        if f > 0.0 && f < nyquist {
            let b = psd.bin_of(f);
            excluded.push((b.saturating_sub(guard), b + guard));
        }
    }
    let finder = LineFinder { psd, opts, excluded };

    let carrier = finder.measure(f_main);
    let mut sidebands = Vec::with_capacity(2 * n_max);
    for order in 1..=n_max {
        for side in [-1i8, 1] {
            let predicted = f_main + side as f64 * order as f64 * f_axion;
            let line = if predicted > 0.0 && predicted < nyquist {
                finder.measure(predicted)
            } else {
                Line {
                    frequency: predicted,
                    power: 0.0,
                    prominence_db: f64::NEG_INFINITY,
                    floor: f64::NAN,
                }
            };
            let found = line.prominence_db >= opts.threshold_db
                && (line.frequency - predicted).abs() <= df
                && line.power > opts.min_relative_power * carrier.power;
            sidebands.push(Sideband {
                order,
                side,
                predicted,
                found,
                line,
            });
        }
    }

    let span_lo = psd.bin_of((f_main - (n_max as f64 + 1.0) * f_axion).max(df));
    let span_hi = psd.bin_of(f_main + (n_max as f64 + 1.0) * f_axion);
    let noise_floor = median(
        (span_lo..=span_hi)
            .filter(|&k| !finder.is_excluded(k))
            .map(|k| psd.power[k])
            .collect(),
    );
    Ok(SidebandReport {
        carrier,
        sidebands,
        noise_floor,
        bin_width: df,
    })
}

/// Fraction of total power at or below each PSD frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativePower {
    pub frequencies: Vec<f64>,
    pub fraction: Vec<f64>,
}

/// Running sum of the PSD normalized to 1 at Nyquist. A zero PSD yields all zeros.
pub fn cumulative_power(psd: &Psd) -> CumulativePower {
    let total: f64 = psd.power.iter().sum();
    let mut acc = 0.0;
    let fraction = psd
        .power
        .iter()
        .map(|p| {
            acc += p;
            if total > 0.0 {
                (acc / total).min(1.0)
            } else {
                0.0
            }
        })
        .collect();
    CumulativePower {
        frequencies: psd.frequencies.clone(),
        fraction,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicSnrOptions {
    /// Window advance (samples).
    pub hop: usize,
    /// Order of the band-isolation filters.
    pub order: usize,
}

impl Default for DynamicSnrOptions {
    fn default() -> Self {
        Self { hop: 10, order: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicSnr {
    /// Centre time of each window (s).
    pub times: Vec<f64>,
    pub db: Vec<f64>,
    pub window: usize,
    pub hop: usize,
}

impl DynamicSnr {
    pub fn mean_db(&self) -> f64 {
        self.db.iter().sum::<f64>() / self.db.len() as f64
    }

    pub fn min_db(&self) -> f64 {
        self.db.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_db(&self) -> f64 {
        self.db.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Signal and reference bands for the lower first sideband: a band of width
/// `f_axion/2` centred on `f_main − f_axion`, and an equally wide noise band
/// centred midway between the first and second lower sidebands.
pub fn lower_sideband_bands(f_main: f64, f_axion: f64) -> ((f64, f64), (f64, f64)) {
    let half = 0.25 * f_axion;
    let s = f_main - f_axion;
    let n = f_main - 1.5 * f_axion;
    ((s - half, s + half), (n - half, n + half))
}

fn window_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Ratio of signal-band to noise-band variance in sliding windows, in dB.
///
/// Each band is isolated with a zero-phase Butterworth band-pass; the two
/// filtered traces are then compared window by window.
pub fn dynamic_snr(
    x: &Trace,
    window: usize,
    sideband_band: (f64, f64),
    noise_band: (f64, f64),
    opts: DynamicSnrOptions,
) -> Result<DynamicSnr> {
    if window < 16 {
        return Err(invalid("snr.window", format!("must be >= 16, got {window}")));
    }
    if opts.hop == 0 {
        return Err(invalid("snr.hop", "must be >= 1"));
    }
    if window > x.len() {
        return Err(Error::TraceTooShort { len: x.len(), needed: window });
    }
    let identical = sideband_band == noise_band;
    let overlaps = sideband_band.0 < noise_band.1 && noise_band.0 < sideband_band.1;
    if overlaps && !identical {
        return Err(Error::Inconsistent {
            fields: vec!["snr.sideband_band".into(), "snr.noise_band".into()],
            reason: format!("bands {sideband_band:?} and {noise_band:?} overlap"),
        });
    }
    let fs = x.sample_rate();
    let isolate = |band: (f64, f64)| -> Result<Vec<f64>> {
        let h = design_bandpass(&BandpassSpec::new(band.0, band.1, opts.order), fs)?;
        Ok(filter_zero_phase(x, &h)?.values)
    };
    let s = isolate(sideband_band)?;
    let n = if identical { s.clone() } else { isolate(noise_band)? };

    let mut times = Vec::new();
    let mut db = Vec::new();
    let mut start = 0;
    while start + window <= x.len() {
        let vs = window_variance(&s[start..start + window]);
        let vn = window_variance(&n[start..start + window]);
        let value = if vn > 0.0 {
            (10.0 * (vs / vn).log10()).clamp(FLOOR_DB, SATURATED_DB)
        } else {
            SATURATED_DB
        };
        db.push(value);
        times.push(x.grid.time(start) + 0.5 * (window - 1) as f64 * x.grid.dt());
        start += opts.hop;
    }
    Ok(DynamicSnr {
        times,
        db,
        window,
        hop: opts.hop,
    })
}

/// `20·log10(ratio)`; zero (or anything below 1e-15) maps to [`FLOOR_DB`].
/// Negative or NaN ratios give NaN.
pub fn snr_db(amplitude_ratio: f64) -> f64 {
    if amplitude_ratio.is_nan() || amplitude_ratio < 0.0 {
        return f64::NAN;
    }
    (20.0 * amplitude_ratio.log10()).max(FLOOR_DB)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{TimeGrid, TraceKind};

    fn tone(n: usize, fs: f64, f: f64, amp: f64) -> Trace {
        let g = TimeGrid::new(1.0 / fs, n, 0.0).unwrap();
        let v = g.times().map(|t| amp * (2.0 * PI * f * t).sin()).collect();
        Trace::new(g, v, TraceKind::Other).unwrap()
    }

    #[test]
    fn snr_db_examples() {
        assert_eq!(snr_db(1.0), 0.0);
        assert!((snr_db(10.0) - 20.0).abs() < 1e-12);
        assert_eq!(snr_db(0.0), FLOOR_DB);
        assert!(snr_db(-1.0).is_nan());
    }

    #[test]
    fn bin_centred_tone_power() {
        let tr = tone(1024, 1024.0, 100.0, 1.0);
        let p = periodogram(&tr).unwrap();
        assert_eq!(p.peak_bin(), 100);
        assert!((p.band_power(98, 102) - 0.5).abs() < 1e-12);
        let h = estimate_psd(&tr, Window::Hann, 1024, 0.0).unwrap();
        assert!((h.band_power(98, 102) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn frequencies_span_zero_to_nyquist() {
        let tr = tone(1000, 1000.0, 50.0, 1.0);
        let p = estimate_psd(&tr, Window::Hann, 200, 0.5).unwrap();
        assert_eq!(p.frequencies[0], 0.0);
        assert_eq!(*p.frequencies.last().unwrap(), 500.0);
        assert!(p.frequencies.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(p.n_segments, 9);
    }

    #[test]
    fn rejects_bad_arguments() {
        let tr = tone(64, 64.0, 4.0, 1.0);
        assert!(estimate_psd(&tr, Window::Hann, 65, 0.0).is_err());
        assert!(estimate_psd(&tr, Window::Hann, 32, 1.0).is_err());
    }

    #[test]
    fn cumulative_power_of_single_tone_is_a_step() {
        let p = periodogram(&tone(256, 256.0, 40.0, 2.0)).unwrap();
        let c = cumulative_power(&p);
        assert!(c.fraction[..40].iter().all(|&v| v < 1e-20));
        assert!(c.fraction[40..].iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn dynamic_snr_identical_bands_is_zero() {
        let g = TimeGrid::new(2e-12, 20_000, 0.0).unwrap();
        let v = g.times().map(|t| (2.0 * PI * 13e9 * t).sin() + 0.3 * (2.0 * PI * 40e9 * t).cos()).collect();
        let tr = Trace::new(g, v, TraceKind::Other).unwrap();
        let band = (12.5e9, 13.5e9);
        let d = dynamic_snr(&tr, 100, band, band, DynamicSnrOptions::default()).unwrap();
        assert!(d.db.iter().all(|&v| v == 0.0));
        assert_eq!(d.db.len(), (20_000 - 100) / 10 + 1);
        assert!(dynamic_snr(&tr, 8, band, band, DynamicSnrOptions::default()).is_err());
        assert!(dynamic_snr(&tr, 100, band, (13e9, 14e9), DynamicSnrOptions::default()).is_err());
    }

    #[test]
    fn dynamic_snr_zero_noise_saturates() {
        let g = TimeGrid::new(2e-12, 20_000, 0.0).unwrap();
        let v = g.times().map(|t| (2.0 * PI * 13e9 * t).sin()).collect();
        let tr = Trace::new(g, v, TraceKind::Other).unwrap();
        let zero = Trace::zeros(g, TraceKind::Other);
        let d = dynamic_snr(&zero, 100, (12.5e9, 13.5e9), (20e9, 21e9), DynamicSnrOptions::default()).unwrap();
        assert!(d.db.iter().all(|&v| v == SATURATED_DB));
        let d = dynamic_snr(&tr, 100, (12.5e9, 13.5e9), (20e9, 21e9), DynamicSnrOptions::default()).unwrap();
        assert!(d.db.iter().all(|v| v.is_finite()));
        assert!(d.mean_db() > 100.0);
    }
}
