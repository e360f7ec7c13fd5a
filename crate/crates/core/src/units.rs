//! Physical constants and the single conversion table between natural units
//! (ħ = c = 1, energies in eV) and laboratory SI quantities.
//!
//! Every natural-unit formula in the crate goes through this module, so the
//! whole eV ↔ Hz ↔ T chain can be audited in one place.

/// e/h, cyclic frequency per electron-volt (Hz/eV). CODATA 2018, exact.
pub const HZ_PER_EV: f64 = 2.417_989_242_084_918e14;

/// ħc in eV·cm. CODATA 2018.
pub const HBAR_C_EV_CM: f64 = 1.973_269_804e-5;

/// Electron rest energy (eV).
pub const ELECTRON_MASS_EV: f64 = 0.510_998_95e6;

/// Electron rest energy (GeV).
pub const ELECTRON_MASS_GEV: f64 = ELECTRON_MASS_EV * 1e-9;

/// Boltzmann constant (J/K). Exact.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Converts an energy in eV to the corresponding cyclic frequency E/h (Hz).
pub fn ev_to_hz(energy_ev: f64) -> f64 {
    energy_ev * HZ_PER_EV
}

/// Converts a cyclic frequency (Hz) to an energy in eV.
pub fn hz_to_ev(frequency_hz: f64) -> f64 {
    frequency_hz / HZ_PER_EV
}

/// Converts an energy density in GeV/cm³ to natural units (eV⁴).
pub fn gev_per_cm3_to_ev4(rho: f64) -> f64 {
    rho * 1e9 * HBAR_C_EV_CM.powi(3)
}

/// Amplitude of the axion-field gradient, `|∇a| = m_a·v·a₀ = v·√(2ρ)`, in eV².
pub fn axion_gradient_ev2(rho_gev_cm3: f64, velocity: f64) -> f64 {
    velocity * (2.0 * gev_per_cm3_to_ev4(rho_gev_cm3)).sqrt()
}

/// Peak shift of the qubit splitting produced by the gradient coupling,
/// `g·v·√(2ρ)/m_e`, expressed as a cyclic frequency (Hz).
///
/// The σ·∇a coupling enters each level with weight `g/(2 m_e)`, so the
/// splitting between the two levels moves by twice that.
pub fn splitting_shift_hz(g_ae: f64, rho_gev_cm3: f64, velocity: f64) -> f64 {
    ev_to_hz(g_ae * axion_gradient_ev2(rho_gev_cm3, velocity) / ELECTRON_MASS_EV)
}

/// Johnson–Nyquist one-sided voltage noise density `4·k_B·T·R` (V²/Hz).
pub fn johnson_voltage_psd(temperature: f64, resistance: f64) -> f64 {
    4.0 * BOLTZMANN * temperature * resistance
}

/// QCD axion mass–decay-constant relation, `m_a ≈ 5.70 µeV · (10¹² GeV / f_a)`.
pub fn decay_constant_gev(m_a_ev: f64) -> f64 {
    5.70e-6 * 1e12 / m_a_ev
}
