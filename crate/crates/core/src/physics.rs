//! Closed-form dynamics of a spin qubit whose splitting is frequency-modulated
//! by the axion-wind coupling.
//!
//! All public frequencies are cyclic (Hz). Angular forms only appear inside
//! phase evaluation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_upto;
use crate::error::{invalid, Result};
use crate::trace::{TimeGrid, Trace, TraceKind};
use crate::units;

/// Scaled modulation depth below which sidebands sit more than ~86 dB under
/// the carrier and are lost in double-precision phase rounding on GHz grids.
/// With the benchmark coupling this corresponds to `amplitude_scale ≳ 10¹⁵`.
pub const OBSERVABLE_DEPTH: f64 = 1e-4;

/// Dark-matter axion field parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxionParams {
    /// Axion mass (eV).
    pub m_a: f64,
    /// Local dark-matter density (GeV/cm³).
    pub rho_a: f64,
    /// Axion–electron coupling.
    pub g_ae: f64,
    /// Velocity as a fraction of c.
    pub v: f64,
    /// Field phase (rad).
    pub phi: f64,
    /// Projection of the axion wind on the quantization axis.
    pub cos_theta0: f64,
}

impl Default for AxionParams {
    fn default() -> Self {
        Self {
            m_a: 3e-6,
            rho_a: 0.3,
            g_ae: 1e-13,
            v: 1e-3,
            phi: 0.0,
            cos_theta0: 1.0,
        }
    }
}

impl AxionParams {
    pub fn new(m_a: f64, rho_a: f64, g_ae: f64, v: f64) -> Result<Self> {
        let p = Self {
            m_a,
            rho_a,
            g_ae,
            v,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m_a.is_finite() && self.m_a > 0.0) {
            return Err(invalid("axion.m_a", format!("must be > 0, got {}", self.m_a)));
        }
        if !(self.rho_a.is_finite() && self.rho_a > 0.0) {
            return Err(invalid("axion.rho_a", format!("must be > 0, got {}", self.rho_a)));
        }
        if !(self.g_ae.is_finite() && self.g_ae >= 0.0) {
            return Err(invalid("axion.g_ae", format!("must be >= 0, got {}", self.g_ae)));
        }
        if !(self.v > 0.0 && self.v < 1.0) {
            return Err(invalid("axion.v", format!("must lie in (0, 1), got {}", self.v)));
        }
        if !self.phi.is_finite() {
            return Err(invalid("axion.phi", "must be finite"));
        }
        if !(-1.0..=1.0).contains(&self.cos_theta0) {
            return Err(invalid(
                "axion.cos_theta0",
                format!("must lie in [-1, 1], got {}", self.cos_theta0),
            ));
        }
        Ok(())
    }

    /// Field amplitude `a₀ = √(2ρ)/m_a` (eV).
    pub fn field_amplitude_ev(&self) -> f64 {
        (2.0 * units::gev_per_cm3_to_ev4(self.rho_a)).sqrt() / self.m_a
    }

    /// Momentum `k_z = m_a·v` (eV).
    pub fn momentum_ev(&self) -> f64 {
        self.m_a * self.v
    }

    pub fn with_coupling(mut self, g_ae: f64) -> Self {
        self.g_ae = g_ae;
        self
    }

    /// Replaces `phi` with a draw from U[0, 2π) keyed on `seed`.
    pub fn with_seeded_phase(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0x50_4841_5345); // "PHASE"
        self.phi = rng.random::<f64>() * 2.0 * PI;
        self
    }
}

/// Static qubit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QubitConfig {
    /// Static field (T).
    pub b0: f64,
    /// Gyromagnetic ratio (Hz/T, cyclic).
    pub gamma: f64,
    /// Longitudinal relaxation (s).
    pub t1: f64,
    /// Transverse dephasing (s).
    pub t2: f64,
}

impl Default for QubitConfig {
    fn default() -> Self {
        Self {
            b0: 0.5,
            gamma: 28e9,
            t1: 1e-3,
            t2: 100e-6,
        }
    }
}

impl QubitConfig {
    pub fn new(b0: f64, gamma: f64, t1: f64, t2: f64) -> Result<Self> {
        let q = Self { b0, gamma, t1, t2 };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b0.is_finite() && self.b0 >= 0.0) {
            return Err(invalid("qubit.b0", format!("must be >= 0, got {}", self.b0)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(invalid("qubit.gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if !(self.t2 > 0.0) {
            return Err(invalid("qubit.t2", format!("must be > 0, got {}", self.t2)));
        }
        if !(self.t1 >= self.t2 / 2.0) {
            return Err(invalid(
                "qubit.t1",
                format!("must satisfy T1 >= T2/2 (T1 = {}, T2 = {})", self.t1, self.t2),
            ));
        }
        Ok(())
    }
}

/// Larmor (carrier) frequency `γ·B₀` in Hz.
pub fn larmor_frequency(q: &QubitConfig) -> f64 {
    q.gamma * q.b0
}

/// Axion oscillation frequency `m_a·e/h` in Hz.
pub fn axion_frequency(a: &AxionParams) -> f64 {
    units::ev_to_hz(a.m_a)
}

/// Effective magnetic field (T) along the quantization axis.
///
/// The gradient coupling shifts the splitting by `g·v·√(2ρ)/m_e`; dividing
/// that frequency by the gyromagnetic ratio gives the equivalent Zeeman field.
pub fn effective_field(a: &AxionParams, q: &QubitConfig) -> f64 {
    units::splitting_shift_hz(a.g_ae, a.rho_a, a.v) * a.cos_theta0 / q.gamma
}

/// Modulation index `β = γ·B_eff / f_axion`.
pub fn modulation_index(gamma: f64, b_eff: f64, f_axion: f64) -> Result<f64> {
    if !(f_axion.is_finite() && f_axion > 0.0) {
        return Err(invalid(
            "f_axion",
            format!("must be > 0 (an axion mass of zero has no modulation), got {f_axion}"),
        ));
    }
    Ok(gamma * b_eff / f_axion)
}

/// Carrier, modulation frequency, effective field and modulation index of a
/// configured axion/qubit pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSignal {
    pub f_main: f64,
    pub f_axion: f64,
    pub b_eff: f64,
    pub beta: f64,
}

impl EffectiveSignal {
    pub fn new(a: &AxionParams, q: &QubitConfig) -> Result<Self> {
        a.validate()?;
        q.validate()?;
        let f_main = larmor_frequency(q);
        let f_axion = axion_frequency(a);
        let b_eff = effective_field(a, q);
        let beta = modulation_index(q.gamma, b_eff, f_axion)?;
        Ok(Self {
            f_main,
            f_axion,
            b_eff,
            beta,
        })
    }

    /// Modulation depth after the amplitude enhancement.
    pub fn scaled_depth(&self, amplitude_scale: f64) -> f64 {
        self.beta * amplitude_scale
    }

    pub fn sidebands_observable(&self, amplitude_scale: f64) -> bool {
        self.scaled_depth(amplitude_scale).abs() >= OBSERVABLE_DEPTH
    }
}

/// Accumulated transverse phase at time `t`:
/// `2π·f_main·t + depth·[cos(2π·f_axion·t + φ) − cos φ]`.
pub(crate) fn accumulated_phase(f_main: f64, f_axion: f64, depth: f64, phi: f64, t: f64) -> f64 {
    2.0 * PI * f_main * t + depth * ((2.0 * PI * f_axion * t + phi).cos() - phi.cos())
}

/// ⟨σx(t)⟩ for the equal superposition, sampled on `grid`.
///
/// The modulation depth is `amplitude_scale·β`; at the physical coupling
/// (`amplitude_scale = 1`) it is far below double-precision resolution and
/// the trace is a pure Larmor tone. See [`OBSERVABLE_DEPTH`].
pub fn sigma_x_trace(
    a: &AxionParams,
    q: &QubitConfig,
    grid: &TimeGrid,
    amplitude_scale: f64,
) -> Result<Trace> {
    if !(amplitude_scale.is_finite() && amplitude_scale >= 1.0) {
        return Err(invalid(
            "amplitude_scale",
            format!("must be a finite enhancement factor >= 1, got {amplitude_scale}"),
        ));
    }
    let sig = EffectiveSignal::new(a, q)?;
    grid.check_frequency("f_main", sig.f_main)?;
    grid.check_frequency("f_axion", sig.f_axion)?;
    let depth = sig.scaled_depth(amplitude_scale);
    let values = grid
        .times()
        .map(|t| accumulated_phase(sig.f_main, sig.f_axion, depth, a.phi, t).cos())
        .collect();
    Trace::new(*grid, values, TraceKind::Transverse)
}

/// Pure spin state `c₊|↑⟩ + c₋|↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    up: Complex64,
    down: Complex64,
}

impl SpinState {
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let norm = up.norm_sqr() + down.norm_sqr();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(invalid(
                "initial_state",
                format!("|c+|^2 + |c-|^2 must equal 1, got {norm}"),
            ));
        }
        Ok(Self { up, down })
    }

    pub fn equal_superposition() -> Self {
        let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { up: c, down: c }
    }

    pub fn spin_up() -> Self {
        Self {
            up: Complex64::new(1.0, 0.0),
            down: Complex64::new(0.0, 0.0),
        }
    }

    pub fn polarization(&self) -> f64 {
        self.up.norm_sqr() - self.down.norm_sqr()
    }
}

/// ⟨σz(t)⟩, conserved because the Hamiltonian is diagonal.
pub fn sigma_z_trace(state: &SpinState, grid: &TimeGrid) -> Trace {
    let p = state.polarization();
    Trace {
        grid: *grid,
        values: vec![p; grid.n_samples()],
        kind: TraceKind::Longitudinal,
        seed: None,
    }
}

/// Relative sideband amplitudes `J_n(β)`, `n = 0..=n_max`.
pub fn sideband_amplitudes(beta: f64, n_max: usize) -> Result<Vec<(usize, f64)>> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(invalid("beta", format!("must be finite and >= 0, got {beta}")));
    }
    Ok(bessel_j_upto(n_max, beta).into_iter().enumerate().collect())
}

/// Multiplies transverse traces by `exp(−t/T2)` and longitudinal traces by
/// `exp(−t/T1)`. Infinite times leave the trace unchanged.
pub fn apply_decoherence(trace: &Trace, q: &QubitConfig) -> Result<Trace> {
    let tau = match trace.kind {
        TraceKind::Transverse => q.t2,
        TraceKind::Longitudinal => q.t1,
        other => {
            return Err(invalid(
                "trace.kind",
                format!("decoherence applies to spin traces only, got {other:?}"),
            ))
        }
    };
    if trace.grid.t0() < 0.0 {
        return Err(invalid("grid.t0", "decoherence envelopes need t >= 0"));
    }
    let values = trace
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| v * (-trace.grid.time(i) / tau).exp())
        .collect();
    Ok(Trace {
        values,
        ..trace.clone()
    })
}
