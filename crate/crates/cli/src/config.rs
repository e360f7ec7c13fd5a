//! TOML run configuration: parsing, defaults bookkeeping and cross-field checks.
//!
//! Every section is optional. A missing key takes its default and is listed in
//! [`RunConfig::defaulted`], which ends up in the run manifest.

use std::path::{Path, PathBuf};

use log::warn;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinaxion_core::filter::{design_bandpass, FilterFamily, FilterRealization};
use spinaxion_core::{
    AxionParams, BandpassSpec, DeviceScenario, EffectiveSignal, NoiseConfig, QubitConfig,
    TimeGrid, Window,
};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Sample spacing (s).
    pub dt: f64,
    pub n_samples: usize,
    /// Time of the first sample (s).
    pub t0: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            dt: 2e-12,
            n_samples: 90_000,
            t0: 0.0,
        }
    }
}

/// Band edges default to ±10 % around the carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_high: Option<f64>,
    pub order: usize,
    pub family: FilterFamily,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            f_low: None,
            f_high: None,
            order: 4,
            family: FilterFamily::Butterworth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub window: Window,
    /// Welch segment length; the whole trace when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segment_len: Option<usize>,
    pub overlap: f64,
    /// Highest sideband order searched for and required inside the pass band.
    pub n_max: usize,
    pub threshold_db: f64,
    /// Dynamic SNR window length (samples).
    pub snr_window: usize,
    pub snr_hop: usize,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self {
            window: Window::Hann,
            segment_len: None,
            overlap: 0.5,
            n_max: 2,
            threshold_db: 3.0,
            snr_window: 100,
            snr_hop: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    /// Lowest mass (eV).
    pub m_min: f64,
    /// Highest mass (eV).
    pub m_max: f64,
    pub points: usize,
    /// Preset names (`current`, `next_generation`, `benchmark`) or
    /// `configured` for the `[scenario]` section.
    pub scenarios: Vec<String>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            m_min: 1e-6,
            m_max: 1e-3,
            points: 61,
            scenarios: vec!["current".into(), "next_generation".into(), "configured".into()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    #[default]
    Csv,
    Bin,
}

impl TraceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Bin => "bin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Master seed; every random stream derives from it.
    pub seed: u64,
    /// Multiplier on the modulation depth. When absent it is `Q·N·√(t/T₂)`
    /// of the `[scenario]` section.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude_scale: Option<f64>,
    pub format: TraceFormat,
    /// Draw the axion phase from the seed instead of using `axion.phi`.
    pub random_phase: bool,
    pub plots: bool,
    /// Output root; per-run directories are created beneath it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 42,
            amplitude_scale: None,
            format: TraceFormat::Csv,
            random_phase: false,
            plots: true,
            out_dir: None,
        }
    }
}

/// The file as written, every section defaulted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FileConfig {
    pub axion: AxionParams,
    pub qubit: QubitConfig,
    pub grid: GridSection,
    pub noise: NoiseConfig,
    pub filter: FilterSection,
    pub spectral: SpectralSection,
    pub scenario: DeviceScenario,
    pub scan: ScanSection,
    pub run: RunSection,
}

const SECTIONS: [&str; 9] = [
    "axion", "qubit", "grid", "noise", "filter", "spectral", "scenario", "scan", "run",
];

/// Keys that have no serialized default because they are derived.
const DERIVED_KEYS: [&str; 5] = [
    "filter.f_low",
    "filter.f_high",
    "spectral.segment_len",
    "run.amplitude_scale",
    "run.out_dir",
];

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub amplitude_scale: Option<f64>,
    pub format: Option<TraceFormat>,
}

/// Validated configuration with every derived quantity resolved.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub axion: AxionParams,
    pub qubit: QubitConfig,
    pub grid: TimeGrid,
    pub noise: NoiseConfig,
    pub filter: BandpassSpec,
    pub spectral: SpectralSection,
    pub scenario: DeviceScenario,
    pub scan: ScanSection,
    pub seed: u64,
    pub amplitude_scale: f64,
    pub format: TraceFormat,
    pub plots: bool,
    pub out_dir: Option<String>,
    pub signal: EffectiveSignal,
    pub sidebands_observable: bool,
    /// Dotted paths of every key that took its default.
    pub defaulted: Vec<String>,
    /// Human-readable caveats recorded in the manifest.
    pub notes: Vec<String>,
    #[serde(skip)]
    pub source: Option<PathBuf>,
    #[serde(skip)]
    pub source_sha256: String,
    #[serde(skip)]
    pub design: FilterRealization,
}

pub fn load_config(path: Option<&Path>, ov: &Overrides) -> CliResult<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text, ov)?;
    cfg.source = path.map(Path::to_path_buf);
    Ok(cfg)
}

pub fn parse_config(text: &str, ov: &Overrides) -> CliResult<RunConfig> {
    let user: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::config("<toml>", e.message().to_string()))?;
    for (key, value) in &user {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(CliError::config(
                key.clone(),
                format!("unknown section; expected one of {}", SECTIONS.join(", ")),
            ));
        }
        if !value.is_table() {
            return Err(CliError::config(key.clone(), "must be a table"));
        }
    }
    if sub_table(&user, "noise").is_some_and(|t| t.contains_key("seed")) {
        return Err(CliError::config(
            "noise.seed",
            "noise streams derive from the master seed; set run.seed instead",
        ));
    }
    let mut file = FileConfig {
        axion: section(&user, "axion")?,
        qubit: section(&user, "qubit")?,
        grid: section(&user, "grid")?,
        noise: section(&user, "noise")?,
        filter: section(&user, "filter")?,
        spectral: section(&user, "spectral")?,
        scenario: section(&user, "scenario")?,
        scan: section(&user, "scan")?,
        run: section(&user, "run")?,
    };
    let mut defaulted = defaulted_keys(&user);
    if let Some(seed) = ov.seed {
        file.run.seed = seed;
        defaulted.retain(|k| k != "run.seed");
    }
    if let Some(scale) = ov.amplitude_scale {
        file.run.amplitude_scale = Some(scale);
        defaulted.retain(|k| k != "run.amplitude_scale");
    }
    if let Some(format) = ov.format {
        file.run.format = format;
        defaulted.retain(|k| k != "run.format");
    }
    let mut cfg = resolve(file, defaulted)?;
    cfg.source_sha256 = hex::encode(Sha256::digest(text.as_bytes()));
    Ok(cfg)
}

fn sub_table<'a>(user: &'a Table, name: &str) -> Option<&'a Table> {
    user.get(name).and_then(Value::as_table)
}

/// Deserializes one section, reporting failures against the offending key.
fn section<T: DeserializeOwned + Default>(user: &Table, name: &str) -> CliResult<T> {
    let Some(table) = sub_table(user, name) else {
        return Ok(T::default());
    };
    match Value::Table(table.clone()).try_into::<T>() {
        Ok(v) => Ok(v),
        Err(e) => {
            let message = e.to_string();
            if let Some(key) = backticked_after(&message, "unknown field") {
                return Err(CliError::config(format!("{name}.{key}"), "unknown key"));
            }
            for (key, value) in table {
                let mut single = Table::new();
                single.insert(key.clone(), value.clone());
                if let Err(e) = Value::Table(single).try_into::<T>() {
                    return Err(CliError::config(format!("{name}.{key}"), e.to_string().trim()));
                }
            }
            Err(CliError::config(name, message.trim()))
        }
    }
}

fn backticked_after<'a>(message: &'a str, marker: &str) -> Option<&'a str> {
    let rest = &message[message.find(marker)? + marker.len()..];
    let start = rest.find('`')? + 1;
    let len = rest[start..].find('`')?;
    Some(&rest[start..start + len])
}

fn defaulted_keys(user: &Table) -> Vec<String> {
    let defaults = Value::try_from(FileConfig::default()).expect("defaults serialize");
    let mut out = Vec::new();
    for (name, section) in defaults.as_table().expect("table") {
        let given = sub_table(user, name);
        for key in section.as_table().expect("section table").keys() {
            if name == "noise" && key == "seed" {
                continue;
            }
            if !given.is_some_and(|t| t.contains_key(key)) {
                out.push(format!("{name}.{key}"));
            }
        }
    }
    for path in DERIVED_KEYS {
        let (name, key) = path.split_once('.').expect("dotted");
        if !sub_table(user, name).is_some_and(|t| t.contains_key(key)) {
            out.push(path.to_string());
        }
    }
    out.sort();
    out
}

fn resolve(file: FileConfig, defaulted: Vec<String>) -> CliResult<RunConfig> {
    let mut notes = Vec::new();
    file.axion.validate()?;
    file.qubit.validate()?;
    file.scenario.validate()?;
    let grid = TimeGrid::new(file.grid.dt, file.grid.n_samples, file.grid.t0)?;
    let noise = NoiseConfig {
        seed: file.run.seed,
        ..file.noise
    };
    noise.validate()?;

    let mut axion = file.axion;
    if file.run.random_phase {
        axion = axion.with_seeded_phase(file.run.seed);
    }
    let signal = EffectiveSignal::new(&axion, &file.qubit)?;
    let sp = file.spectral;
    let nyquist = grid.nyquist();
    let top = signal.f_main + sp.n_max as f64 * signal.f_axion;
    if !(top < nyquist) {
        return Err(CliError::Config {
            fields: vec!["qubit.b0".into(), "axion.m_a".into(), "grid.dt".into()],
            message: format!(
                "highest sideband {top:.6e} Hz is not below the Nyquist frequency {nyquist:.6e} Hz"
            ),
        });
    }
    let bottom = signal.f_main - sp.n_max as f64 * signal.f_axion;
    if !(bottom > 0.0) {
        return Err(CliError::Config {
            fields: vec!["qubit.b0".into(), "axion.m_a".into()],
            message: format!("lowest sideband {bottom:.6e} Hz is not above zero"),
        });
    }
    if noise.ac_freq >= nyquist {
        return Err(CliError::Config {
            fields: vec!["noise.ac_freq".into(), "grid.dt".into()],
            message: format!("{} Hz is not below the Nyquist frequency {nyquist:.6e} Hz", noise.ac_freq),
        });
    }

    let fs = &file.filter;
    let filter = BandpassSpec {
        f_low: fs.f_low.unwrap_or(0.9 * signal.f_main),
        f_high: fs.f_high.unwrap_or(1.1 * signal.f_main),
        order: fs.order,
        family: fs.family,
    };
    let design = design_bandpass(&filter, grid.sample_rate())?;
    design.check_sidebands_retained(signal.f_main, signal.f_axion, sp.n_max)?;

    let n = grid.n_samples();
    if sp.segment_len.is_some_and(|s| s < 16 || s > n) {
        return Err(CliError::config(
            "spectral.segment_len",
            format!("must lie in [16, {n}], got {}", sp.segment_len.unwrap_or(0)),
        ));
    }
    if !(0.0..1.0).contains(&sp.overlap) {
        return Err(CliError::config("spectral.overlap", format!("must lie in [0, 1), got {}", sp.overlap)));
    }
    if !(sp.threshold_db.is_finite() && sp.threshold_db > 0.0) {
        return Err(CliError::config("spectral.threshold_db", "must be > 0"));
    }
    if sp.snr_window < 16 || sp.snr_window > n {
        return Err(CliError::config(
            "spectral.snr_window",
            format!("must lie in [16, {n}], got {}", sp.snr_window),
        ));
    }
    if sp.snr_hop == 0 {
        return Err(CliError::config("spectral.snr_hop", "must be >= 1"));
    }
    if sp.n_max == 0 {
        return Err(CliError::config("spectral.n_max", "must be >= 1"));
    }

    let sc = &file.scan;
    if !(sc.m_min > 0.0 && sc.m_max >= sc.m_min && sc.m_max.is_finite()) {
        return Err(CliError::Config {
            fields: vec!["scan.m_min".into(), "scan.m_max".into()],
            message: format!("need 0 < m_min <= m_max, got [{}, {}]", sc.m_min, sc.m_max),
        });
    }
    if sc.points == 0 {
        return Err(CliError::config("scan.points", "must be >= 1"));
    }
    if sc.scenarios.is_empty() {
        return Err(CliError::config("scan.scenarios", "must name at least one scenario"));
    }
    for name in &sc.scenarios {
        if scenario_by_name(name, &file.scenario).is_none() {
            return Err(CliError::config(
                "scan.scenarios",
                format!("unknown scenario `{name}`; expected current, next_generation, benchmark or configured"),
            ));
        }
    }

    let s = &file.scenario;
    let amplitude_scale = file
        .run
        .amplitude_scale
        .unwrap_or_else(|| s.q * s.n * (s.t / s.t2).sqrt());
    if !(amplitude_scale.is_finite() && amplitude_scale >= 1.0) {
        return Err(CliError::config(
            "run.amplitude_scale",
            format!("must be a finite enhancement factor >= 1, got {amplitude_scale}"),
        ));
    }
    let sidebands_observable = signal.sidebands_observable(amplitude_scale);
    if !sidebands_observable {
        let msg = format!(
            "modulation depth {:.3e} (beta {:.3e} x amplitude_scale {:.3e}) is below {:.0e}; sidebands will not be visible",
            signal.scaled_depth(amplitude_scale),
            signal.beta,
            amplitude_scale,
            spinaxion_core::physics::OBSERVABLE_DEPTH
        );
        warn!("{msg}");
        notes.push(msg);
    }
    if defaulted.iter().any(|k| k == "run.amplitude_scale") {
        notes.push(format!(
            "run.amplitude_scale defaulted to Q*N*sqrt(t/T2) = {amplitude_scale:.6e}"
        ));
    }
    if defaulted.iter().any(|k| k == "noise.telegraph_tau") {
        notes.push("noise.telegraph_tau uses the unconstrained default of 1e-6 s".into());
    }

    Ok(RunConfig {
        axion,
        qubit: file.qubit,
        grid,
        noise,
        filter,
        spectral: sp,
        scenario: file.scenario,
        scan: file.scan,
        seed: file.run.seed,
        amplitude_scale,
        format: file.run.format,
        plots: file.run.plots,
        out_dir: file.run.out_dir,
        signal,
        sidebands_observable,
        defaulted,
        notes,
        source: None,
        source_sha256: String::new(),
        design,
    })
}

pub fn scenario_by_name(name: &str, configured: &DeviceScenario) -> Option<DeviceScenario> {
    match name {
        "current" => Some(DeviceScenario::current()),
        "next_generation" => Some(DeviceScenario::next_generation()),
        "benchmark" => Some(DeviceScenario::benchmark()),
        "configured" => Some(*configured),
        _ => None,
    }
}

impl RunConfig {
    /// Canonical JSON of the resolved values. Bookkeeping about which keys
    /// were defaulted is left out, so equivalent files hash alike.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("struct serializes to an object");
        obj.remove("defaulted");
        obj.remove("notes");
        obj.remove("out_dir");
        serde_json::to_string(&v).expect("value serializes")
    }

    /// SHA-256 of [`RunConfig::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    /// Welch segment length, the full trace unless configured.
    pub fn segment_len(&self) -> usize {
        self.spectral.segment_len.unwrap_or(self.grid.n_samples())
    }
}
