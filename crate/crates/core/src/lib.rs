//! Simulation and analysis of axion-induced frequency modulation in spin qubits.
//!
//! The crate covers the signal model, a seven-channel noise synthesizer,
//! Butterworth band isolation, spectral diagnostics and the sensitivity
//! projections used to plan a search.

pub mod bessel;
pub mod error;
pub mod filter;
pub mod noise;
pub mod physics;
pub mod sensitivity;
pub mod spectral;
pub mod trace;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use noise::{compose_noise, NoiseChannel, NoiseConfig, RtnEnsemble, RtnSource};
pub use physics::{AxionParams, EffectiveSignal, QubitConfig, SpinState};
pub use trace::{TimeGrid, Trace, TraceKind};
pub use filter::{design_bandpass, filter_causal, filter_zero_phase, BandpassSpec, FilterRealization};
pub use spectral::{
    cumulative_power, detect_sidebands, dynamic_snr, estimate_psd, snr_db, Psd, SidebandReport, Window,
};
pub use sensitivity::{
    beta_min, detection_threshold, dfsz_band, g_ae_limit, scan, snr_amp, DeviceScenario, DfszModel, DfszVariant,
    ScanTable,
};
