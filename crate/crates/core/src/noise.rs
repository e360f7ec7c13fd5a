//! Seeded noise channels and analytic charge-noise spectra.
//!
//! Channel amplitudes are target RMS values in the same dimensionless units
//! as the ⟨σx⟩ trace; the generators add directly to the polarization signal.
//! Every channel draws from its own ChaCha8 stream keyed on the master seed,
//! so a channel's output does not depend on which other channels are enabled.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::trace::{TimeGrid, Trace, TraceKind};
use crate::units;

/// Amplitudes and shape parameters of the seven noise channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub white_amp: f64,
    pub pink_amp: f64,
    /// Low-frequency corner of the 1/f shaping (Hz).
    pub pink_fmin: f64,
    pub readout_sigma: f64,
    /// Per-sample glitch probability.
    pub p_spike: f64,
    /// Glitch height in units of `readout_sigma`.
    pub spike_factor: f64,
    pub telegraph_amp: f64,
    /// Mean dwell time of the telegraph channel (s).
    pub telegraph_tau: f64,
    pub drift_amp: f64,
    pub ac_amp: f64,
    /// Line-pickup frequency (Hz).
    pub ac_freq: f64,
    /// Johnson–Nyquist resistor temperature (K).
    pub temperature: f64,
    /// Johnson–Nyquist resistance (Ω).
    pub resistance: f64,
    /// Power gain from V² at the resistor to squared signal units.
    pub johnson_gain: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            white_amp: 1e-3,
            pink_amp: 2e-2,
            pink_fmin: 1.0,
            readout_sigma: 2e-3,
            p_spike: 5e-3,
            spike_factor: 10.0,
            telegraph_amp: 5e-4,
            telegraph_tau: 1e-6,
            drift_amp: 2e-4,
            ac_amp: 1e-4,
            ac_freq: 50.0,
            temperature: 300.0,
            resistance: 50.0,
            johnson_gain: 1e-6,
            seed: 42,
        }
    }
}

impl NoiseConfig {
    /// All channels off.
    pub fn silent() -> Self {
        Self {
            white_amp: 0.0,
            pink_amp: 0.0,
            readout_sigma: 0.0,
            p_spike: 0.0,
            telegraph_amp: 0.0,
            drift_amp: 0.0,
            ac_amp: 0.0,
            temperature: 0.0,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("noise.white_amp", self.white_amp),
            ("noise.pink_amp", self.pink_amp),
            ("noise.readout_sigma", self.readout_sigma),
            ("noise.spike_factor", self.spike_factor),
            ("noise.telegraph_amp", self.telegraph_amp),
            ("noise.drift_amp", self.drift_amp),
            ("noise.ac_amp", self.ac_amp),
            ("noise.ac_freq", self.ac_freq),
            ("noise.temperature", self.temperature),
            ("noise.resistance", self.resistance),
            ("noise.johnson_gain", self.johnson_gain),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.p_spike) {
            return Err(invalid("noise.p_spike", format!("must lie in [0, 1], got {}", self.p_spike)));
        }
        if !(self.pink_fmin.is_finite() && self.pink_fmin > 0.0) {
            return Err(invalid("noise.pink_fmin", format!("must be > 0, got {}", self.pink_fmin)));
        }
        if !(self.telegraph_tau.is_finite() && self.telegraph_tau > 0.0) {
            return Err(invalid(
                "noise.telegraph_tau",
                format!("must be > 0, got {}", self.telegraph_tau),
            ));
        }
        Ok(())
    }

    /// RMS of the Johnson channel in signal units on `grid`.
    pub fn johnson_rms(&self, grid: &TimeGrid) -> f64 {
        (self.johnson_gain * units::johnson_voltage_psd(self.temperature, self.resistance) * grid.nyquist())
            .sqrt()
    }
}

/// The seven channels, in composition order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseChannel {
    White,
    Pink,
    Readout,
    Telegraph,
    Drift,
    Ac,
    Johnson,
}

impl NoiseChannel {
    pub const ALL: [NoiseChannel; 7] = [
        NoiseChannel::White,
        NoiseChannel::Pink,
        NoiseChannel::Readout,
        NoiseChannel::Telegraph,
        NoiseChannel::Drift,
        NoiseChannel::Ac,
        NoiseChannel::Johnson,
    ];

    fn stream(self) -> u64 {
        match self {
            NoiseChannel::White => 1,
            NoiseChannel::Pink => 2,
            NoiseChannel::Readout => 3,
            NoiseChannel::Telegraph => 4,
            NoiseChannel::Drift => 5,
            NoiseChannel::Ac => 6,
            NoiseChannel::Johnson => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseChannel::White => "white",
            NoiseChannel::Pink => "pink",
            NoiseChannel::Readout => "readout",
            NoiseChannel::Telegraph => "telegraph",
            NoiseChannel::Drift => "drift",
            NoiseChannel::Ac => "ac",
            NoiseChannel::Johnson => "johnson",
        }
    }

    pub fn generate(self, grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
        match self {
            NoiseChannel::White => gen_white(grid, cfg),
            NoiseChannel::Pink => gen_pink(grid, cfg),
            NoiseChannel::Readout => gen_readout(grid, cfg),
            NoiseChannel::Telegraph => gen_telegraph(grid, cfg),
            NoiseChannel::Drift => gen_drift(grid, cfg),
            NoiseChannel::Ac => gen_ac(grid, cfg),
            NoiseChannel::Johnson => gen_johnson(grid, cfg),
        }
    }
}

/// Independent generator for one channel of a master seed.
pub fn channel_rng(seed: u64, channel: NoiseChannel) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel.stream());
    rng
}

fn noise_trace(grid: &TimeGrid, cfg: &NoiseConfig, values: Vec<f64>) -> Result<Trace> {
    Ok(Trace::new(*grid, values, TraceKind::Noise)?.with_seed(cfg.seed))
}

fn silent(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    noise_trace(grid, cfg, vec![0.0; grid.n_samples()])
}

fn gaussian(rng: &mut impl Rng, n: usize, sigma: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sigma * z
        })
        .collect()
}

pub fn gen_white(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    cfg.validate()?;
    if cfg.white_amp == 0.0 {
        return silent(grid, cfg);
    }
    let mut rng = channel_rng(cfg.seed, NoiseChannel::White);
    noise_trace(grid, cfg, gaussian(&mut rng, grid.n_samples(), cfg.white_amp))
}

/// Gaussian noise with one-sided PSD ∝ 1/max(f, pink_fmin), synthesized by
/// shaping a white spectrum and inverting it. The result is scaled by the
/// expected (not sample) standard deviation, so the PSD level is exact.
pub fn gen_pink(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    cfg.validate()?;
    if cfg.pink_amp == 0.0 {
        return silent(grid, cfg);
    }
    let mut rng = channel_rng(cfg.seed, NoiseChannel::Pink);
    let values = shaped_gaussian(&mut rng, grid, |f| 1.0 / f.max(cfg.pink_fmin));
    let values = values.into_iter().map(|v| v * cfg.pink_amp).collect();
    noise_trace(grid, cfg, values)
}

/// Unit-variance Gaussian series whose one-sided PSD follows `shape(f)`.
pub fn shaped_gaussian(rng: &mut impl Rng, grid: &TimeGrid, shape: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = grid.n_samples();
    let df = 1.0 / grid.duration();
    let half = n / 2;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    let mut var = 0.0;
    for k in 1..=half {
        let s = shape(k as f64 * df).sqrt();
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        if n % 2 == 0 && k == half {
            spec[k] = Complex64::new(s * a, 0.0);
            var += s * s;
        } else {
            spec[k] = Complex64::new(s * a, s * b);
            spec[n - k] = spec[k].conj();
            var += 4.0 * s * s;
        }
    }
    let sigma = var.sqrt() / n as f64;
    if sigma == 0.0 {
        return vec![0.0; n];
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|c| c.re / n as f64 / sigma).collect()
}

/// Gaussian readout noise plus sign-random glitches of height
/// `spike_factor·readout_sigma` with per-sample probability `p_spike`.
pub fn gen_readout(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    cfg.validate()?;
    if cfg.readout_sigma == 0.0 {
        return silent(grid, cfg);
    }
    let mut rng = channel_rng(cfg.seed, NoiseChannel::Readout);
    let spike = cfg.spike_factor * cfg.readout_sigma;
    let values = (0..grid.n_samples())
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            let mut v = cfg.readout_sigma * g;
            if rng.random::<f64>() < cfg.p_spike {
                v += if rng.random::<bool>() { spike } else { -spike };
            }
            v
        })
        .collect();
    noise_trace(grid, cfg, values)
}

/// Symmetric two-state Markov process `±telegraph_amp` with exponential
/// dwell times of mean `telegraph_tau`.
pub fn gen_telegraph(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    cfg.validate()?;
    if cfg.telegraph_amp == 0.0 {
        return silent(grid, cfg);
    }
    let mut rng = channel_rng(cfg.seed, NoiseChannel::Telegraph);
    let values = telegraph(&mut rng, grid, cfg.telegraph_amp, cfg.telegraph_tau);
    noise_trace(grid, cfg, values)
}

/// Samples of a continuous-time telegraph process `±level` with mean dwell
/// `dwell` seconds, started in a random state.
pub fn telegraph(rng: &mut impl Rng, grid: &TimeGrid, level: f64, dwell: f64) -> Vec<f64> {
    let exp = Exp::new(1.0 / dwell).expect("dwell time is positive");
    let mut state = if rng.random::<bool>() { level } else { -level };
    let mut next_switch = grid.t0() + exp.sample(rng);
    grid.times()
        .map(|t| {
            while t >= next_switch {
                state = -state;
                next_switch += exp.sample(rng);
            }
            state
        })
        .collect()
}

/// Gaussian random walk rescaled to an RMS of `drift_amp` over the grid.
pub fn gen_drift(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    cfg.validate()?;
    if cfg.drift_amp == 0.0 {
        return silent(grid, cfg);
    }
    let mut rng = channel_rng(cfg.seed, NoiseChannel::Drift);
    let mut acc = 0.0;
    let mut walk: Vec<f64> = (0..grid.n_samples())
        .map(|_| {
            let step: f64 = StandardNormal.sample(&mut rng);
            acc += step;
            acc
        })
        .collect();
    let rms = (walk.iter().map(|v| v * v).sum::<f64>() / walk.len() as f64).sqrt();
    if rms > 0.0 {
        let k = cfg.drift_amp / rms;
        walk.iter_mut().for_each(|v| *v *= k);
    }
    noise_trace(grid, cfg, walk)
}

/// `ac_amp·sin(2π·ac_freq·t + φ)` with a seeded phase.
pub fn gen_ac(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    cfg.validate()?;
    if cfg.ac_amp == 0.0 {
        return silent(grid, cfg);
    }
    grid.check_frequency("noise.ac_freq", cfg.ac_freq)?;
    let mut rng = channel_rng(cfg.seed, NoiseChannel::Ac);
    let phase = rng.random::<f64>() * 2.0 * PI;
    let values = grid
        .times()
        .map(|t| cfg.ac_amp * (2.0 * PI * cfg.ac_freq * t + phase).sin())
        .collect();
    noise_trace(grid, cfg, values)
}

/// Thermal noise of a resistor: Gaussian with variance `4·k_B·T·R` times the
/// Nyquist bandwidth, multiplied by `johnson_gain` into signal units.
pub fn gen_johnson(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    cfg.validate()?;
    let sigma = cfg.johnson_rms(grid);
    if sigma == 0.0 {
        return silent(grid, cfg);
    }
    let mut rng = channel_rng(cfg.seed, NoiseChannel::Johnson);
    noise_trace(grid, cfg, gaussian(&mut rng, grid.n_samples(), sigma))
}

/// Sum of all seven channels, composed in [`NoiseChannel::ALL`] order.
pub fn compose_noise(grid: &TimeGrid, cfg: &NoiseConfig) -> Result<Trace> {
    let mut total = vec![0.0; grid.n_samples()];
    for ch in NoiseChannel::ALL {
        let tr = ch.generate(grid, cfg)?;
        total.iter_mut().zip(&tr.values).for_each(|(acc, v)| *acc += v);
    }
    noise_trace(grid, cfg, total)
}

/// Charge defect producing a random-telegraph shift of the qubit splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtnSource {
    /// Splitting shift between the defect's two states (Hz).
    pub delta_eps: f64,
    /// Correlation (switching) time of the Lorentzian (s).
    pub tau: f64,
}

impl RtnSource {
    pub fn new(delta_eps: f64, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid("rtn.tau", format!("must be > 0, got {tau}")));
        }
        if !delta_eps.is_finite() {
            return Err(invalid("rtn.delta_eps", "must be finite"));
        }
        Ok(Self { delta_eps, tau })
    }
}

/// Lorentzian `δε²·τ / (1 + (2πf)²τ²)`.
///
/// The value is `S(ω)` evaluated at `ω = 2πf`. It also equals the one-sided
/// per-Hz density of the sampled process from [`simulate_rtn`].
pub fn rtn_psd(src: &RtnSource, f: f64) -> f64 {
    let wt = 2.0 * PI * f * src.tau;
    src.delta_eps * src.delta_eps * src.tau / (1.0 + wt * wt)
}

/// Telegraph process between `±δε/2` whose autocorrelation decays as
/// `exp(−|t|/τ)`: each state is left at rate `1/(2τ)`.
pub fn simulate_rtn(src: &RtnSource, grid: &TimeGrid, rng: &mut impl Rng) -> Trace {
    let values = telegraph(rng, grid, 0.5 * src.delta_eps, 2.0 * src.tau);
    Trace {
        grid: *grid,
        values,
        kind: TraceKind::Noise,
        seed: None,
    }
}

/// Collection of defects with switching times spread over `[tau_min, tau_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtnEnsemble {
    pub sources: Vec<RtnSource>,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Spectral coefficient of the 1/f law `S(ω) = α⟨δε²⟩/ω`.
    pub alpha: f64,
}

impl RtnEnsemble {
    pub fn new(sources: Vec<RtnSource>, tau_min: f64, tau_max: f64, alpha: f64) -> Result<Self> {
        if !(tau_min > 0.0 && tau_min < tau_max && tau_max.is_finite()) {
            return Err(invalid(
                "rtn.tau_min",
                format!("need 0 < tau_min < tau_max, got [{tau_min}, {tau_max}]"),
            ));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("rtn.alpha", format!("must be > 0, got {alpha}")));
        }
        Ok(Self {
            sources,
            tau_min,
            tau_max,
            alpha,
        })
    }

    /// `count` identical-amplitude defects with `ln τ` uniform on the range.
    pub fn log_uniform(
        count: usize,
        delta_eps: f64,
        tau_min: f64,
        tau_max: f64,
        alpha: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut ens = Self::new(Vec::with_capacity(count), tau_min, tau_max, alpha)?;
        let (lo, hi) = (tau_min.ln(), tau_max.ln());
        for _ in 0..count {
            let tau = (lo + (hi - lo) * rng.random::<f64>()).exp();
            ens.sources.push(RtnSource::new(delta_eps, tau)?);
        }
        Ok(ens)
    }

    /// Mean squared splitting shift per defect.
    pub fn mean_square_shift(&self) -> f64 {
        if self.sources.is_empty() {
            return 0.0;
        }
        self.sources.iter().map(|s| s.delta_eps * s.delta_eps).sum::<f64>() / self.sources.len() as f64
    }

    /// Exact sum of the member Lorentzians.
    pub fn lorentzian_sum(&self, f: f64) -> f64 {
        self.sources.iter().map(|s| rtn_psd(s, f)).sum()
    }

    pub fn simulate(&self, grid: &TimeGrid, rng: &mut impl Rng) -> Trace {
        let mut total = Trace::zeros(*grid, TraceKind::Noise);
        for src in &self.sources {
            let tr = simulate_rtn(src, grid, rng);
            total.values.iter_mut().zip(&tr.values).for_each(|(a, v)| *a += v);
        }
        total
    }
}

/// 1/f law `α⟨δε²⟩/ω` at `ω = 2πf`, the same value convention as [`rtn_psd`].
pub fn one_over_f_psd(ens: &RtnEnsemble, f: f64) -> Result<f64> {
    if !(f.is_finite() && f > 0.0) {
        return Err(invalid("f", format!("1/f spectrum diverges at f = {f}")));
    }
    Ok(ens.alpha * ens.mean_square_shift() / (2.0 * PI * f))
}
