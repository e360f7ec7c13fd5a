//! Analytic sensitivity projections: ensemble SNR, minimum detectable
//! modulation index, the 5σ threshold and coupling exclusion curves.
//!
//! Frequencies and the gyromagnetic ratio are cyclic throughout, so
//! `β / β_min` equals the amplitude SNR exactly.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::physics::{axion_frequency, effective_field, AxionParams, QubitConfig};
use crate::units;

/// Amplitude SNR required for a detection claim.
pub const DETECTION_SIGMA: f64 = 5.0;

/// Range of the Higgs vacuum-alignment ratio spanned by the DFSZ band.
pub const TAN_BETA_RANGE: (f64, f64) = (0.1, 50.0);

/// Sensor array and integration budget. Defaults to [`DeviceScenario::benchmark`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceScenario {
    /// Resonator quality factor.
    pub q: f64,
    /// Number of spins.
    pub n: f64,
    /// Total integration time (s). `t / t2` repetitions are folded into `√t`.
    pub t: f64,
    /// Array-level magnetic sensitivity (T/√Hz).
    pub eta_b: f64,
    /// Coherence time of one repetition (s).
    pub t2: f64,
    /// Heisenberg (`N`) rather than standard-quantum-limit (`√N`) scaling.
    pub entangled: bool,
}

impl Default for DeviceScenario {
    fn default() -> Self {
        Self::benchmark()
    }
}

impl DeviceScenario {
    /// Q = 10⁴, N = 16, T₂ = 1 ms, one coherence time of integration.
    pub fn current() -> Self {
        Self {
            q: 1e4,
            n: 16.0,
            t: 1e-3,
            eta_b: 1e-7,
            t2: 1e-3,
            entangled: true,
        }
    }

    /// Q = 10⁶, N = 10⁶, T₂ = 100 ms, one coherence time of integration.
    pub fn next_generation() -> Self {
        Self {
            q: 1e6,
            n: 1e6,
            t: 0.1,
            eta_b: 1e-7,
            t2: 0.1,
            entangled: true,
        }
    }

    /// Benchmark qubit array: Q = 10⁵, N = 10⁶ entangled, T₂ = 100 µs, t = T₂.
    pub fn benchmark() -> Self {
        Self {
            q: 1e5,
            n: 1e6,
            t: 100e-6,
            eta_b: 1e-7,
            t2: 100e-6,
            entangled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q.is_finite() && self.q >= 1.0) {
            return Err(invalid("scenario.q", format!("must be >= 1, got {}", self.q)));
        }
        if !(self.n.is_finite() && self.n >= 1.0) {
            return Err(invalid("scenario.n", format!("must be >= 1, got {}", self.n)));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(invalid("scenario.t", format!("must be > 0, got {}", self.t)));
        }
        if !(self.eta_b.is_finite() && self.eta_b >= 0.0) {
            return Err(invalid("scenario.eta_b", format!("must be >= 0, got {}", self.eta_b)));
        }
        if !(self.t2.is_finite() && self.t2 > 0.0) {
            return Err(invalid("scenario.t2", format!("must be > 0, got {}", self.t2)));
        }
        Ok(())
    }

    /// Effective spin number: `N` when entangled, `√N` otherwise.
    pub fn n_eff(&self) -> f64 {
        if self.entangled {
            self.n
        } else {
            self.n.sqrt()
        }
    }

    /// Number of coherent repetitions `M = t / T₂`.
    pub fn repetitions(&self) -> f64 {
        self.t / self.t2
    }

    /// `Q·N_eff·√t`, the enhancement over a single spin measured for one second.
    pub fn enhancement(&self) -> f64 {
        self.q * self.n_eff() * self.t.sqrt()
    }

    /// Integration time at which `snr_amp` reaches `target` for the given field.
    pub fn time_for_snr(&self, target: f64, b_eff: f64) -> f64 {
        (target * self.eta_b / (self.q * self.n_eff() * b_eff)).powi(2)
    }
}

/// `Q·N_eff·√t·B_eff / η_B`.
pub fn snr_amp(s: &DeviceScenario, a: &AxionParams, q: &QubitConfig) -> Result<f64> {
    s.validate()?;
    a.validate()?;
    q.validate()?;
    let b_eff = effective_field(a, q).abs();
    if b_eff == 0.0 {
        return Ok(0.0);
    }
    if s.eta_b == 0.0 {
        return Err(Error::Numeric("perfect sensor (eta_b = 0) has unbounded SNR".into()));
    }
    Ok(s.enhancement() * b_eff / s.eta_b)
}

/// `γ·η_B / (Q·N_eff·√t·f_axion)`. With `Q = N = 1` and `t = T₂` this is the
/// single-shot limit.
pub fn beta_min(s: &DeviceScenario, gamma: f64, f_axion: f64) -> Result<f64> {
    s.validate()?;
    if !(f_axion.is_finite() && f_axion > 0.0) {
        return Err(invalid("f_axion", format!("must be > 0, got {f_axion}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid("qubit.gamma", format!("must be > 0, got {gamma}")));
    }
    Ok(gamma * s.eta_b / (s.enhancement() * f_axion))
}

/// `β ≥ 5·β_min`, boundary inclusive.
pub fn detection_threshold(beta: f64, beta_min: f64) -> bool {
    beta >= DETECTION_SIGMA * beta_min
}

/// Smallest coupling that passes [`detection_threshold`] at mass `m_a`.
///
/// Both β and β_min scale as `1/f_axion`, so the result does not depend on
/// `m_a` beyond validation.
pub fn g_ae_limit(m_a: f64, s: &DeviceScenario, env: &AxionParams, q: &QubitConfig) -> Result<f64> {
    s.validate()?;
    q.validate()?;
    let unit = AxionParams { m_a, g_ae: 1.0, ..*env };
    unit.validate()?;
    let field_per_g = effective_field(&unit, q).abs();
    if field_per_g == 0.0 {
        return Err(Error::Numeric("axion wind is orthogonal to the quantization axis".into()));
    }
    Ok(DETECTION_SIGMA * s.eta_b / (s.enhancement() * field_per_g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DfszVariant {
    #[default]
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfszModel {
    pub tan_beta: f64,
    /// Decay constant (GeV).
    pub f_a: f64,
    pub variant: DfszVariant,
}

impl DfszModel {
    pub fn new(tan_beta: f64, f_a: f64, variant: DfszVariant) -> Result<Self> {
        let m = Self { tan_beta, f_a, variant };
        m.validate()?;
        Ok(m)
    }

    /// Model at axion mass `m_a` (eV) through the QCD mass relation.
    pub fn at_mass(m_a: f64, tan_beta: f64, variant: DfszVariant) -> Result<Self> {
        if !(m_a.is_finite() && m_a > 0.0) {
            return Err(invalid("axion.m_a", format!("must be > 0, got {m_a}")));
        }
        Self::new(tan_beta, units::decay_constant_gev(m_a), variant)
    }

    /// Any positive decay constant is accepted; the QCD relation puts masses
    /// below 5.7 µeV above 10¹² GeV.
    pub fn validate(&self) -> Result<()> {
        if !(self.tan_beta.is_finite() && self.tan_beta > 0.0) {
            return Err(invalid("dfsz.tan_beta", format!("must be > 0, got {}", self.tan_beta)));
        }
        if !(self.f_a.is_finite() && self.f_a > 0.0) {
            return Err(invalid("dfsz.f_a", format!("must be > 0, got {}", self.f_a)));
        }
        Ok(())
    }

    /// Whether `f_a` lies in the conventional [10⁹, 10¹²] GeV window.
    pub fn in_classic_window(&self) -> bool {
        (1e9..=1e12).contains(&self.f_a)
    }

    /// `C_e = cos²β/3` (I) or `sin²β/3` (II).
    pub fn c_e(&self) -> f64 {
        let beta = self.tan_beta.atan();
        match self.variant {
            DfszVariant::I => beta.cos().powi(2) / 3.0,
            DfszVariant::II => beta.sin().powi(2) / 3.0,
        }
    }
}

/// Tree-level coupling `g_ae = C_e·m_e / f_a`.
pub fn dfsz_band(m: &DfszModel) -> Result<f64> {
    m.validate()?;
    Ok(m.c_e() * units::ELECTRON_MASS_GEV / m.f_a)
}

/// DFSZ couplings at one mass: the envelope of both variants over
/// [`TAN_BETA_RANGE`] and the `tan β = 1` line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfszEnvelope {
    pub low: f64,
    pub tan_beta_one: f64,
    pub high: f64,
}

pub fn dfsz_envelope(m_a: f64) -> Result<DfszEnvelope> {
    let mut low = f64::INFINITY;
    let mut high = f64::NEG_INFINITY;
    for variant in [DfszVariant::I, DfszVariant::II] {
        for tb in [TAN_BETA_RANGE.0, TAN_BETA_RANGE.1] {
            let g = dfsz_band(&DfszModel::at_mass(m_a, tb, variant)?)?;
            low = low.min(g);
            high = high.max(g);
        }
    }
    Ok(DfszEnvelope {
        low,
        tan_beta_one: dfsz_band(&DfszModel::at_mass(m_a, 1.0, DfszVariant::I)?)?,
        high,
    })
}

/// `n` logarithmically spaced masses from `lo` to `hi` inclusive.
pub fn log_mass_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(invalid("scan.m_min", format!("need 0 < m_min <= m_max, got [{lo}, {hi}]")));
    }
    match n {
        0 => Err(invalid("scan.points", "grid must not be empty")),
        1 => Ok(vec![lo]),
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            Ok((0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub m_a: f64,
    pub f_axion: f64,
    /// One limit per scenario, in scenario order.
    pub limits: Vec<f64>,
    pub dfsz: DfszEnvelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub scenarios: Vec<String>,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m_a_eV,f_axion_Hz");
        for name in &self.scenarios {
            out.push_str(&format!(",g_ae_limit_{name}_dimensionless"));
        }
        out.push_str(",dfsz_low_dimensionless,dfsz_tan_beta_1_dimensionless,dfsz_high_dimensionless\n");
        for r in &self.rows {
            out.push_str(&format!("{:e},{:e}", r.m_a, r.f_axion));
            for g in &r.limits {
                out.push_str(&format!(",{g:e}"));
            }
            out.push_str(&format!(
                ",{:e},{:e},{:e}\n",
                r.dfsz.low, r.dfsz.tan_beta_one, r.dfsz.high
            ));
        }
        out
    }
}

/// Exclusion limits and DFSZ envelope at every mass, rows in grid order.
pub fn scan(
    masses: &[f64],
    scenarios: &[(String, DeviceScenario)],
    env: &AxionParams,
    q: &QubitConfig,
) -> Result<ScanTable> {
    if masses.is_empty() {
        return Err(invalid("scan.points", "grid must not be empty"));
    }
    let rows = masses
        .iter()
        .map(|&m_a| {
            let unit = AxionParams { m_a, ..*env };
            Ok(ScanRow {
                m_a,
                f_axion: axion_frequency(&unit),
                limits: scenarios
                    .iter()
                    .map(|(_, s)| g_ae_limit(m_a, s, env, q))
                    .collect::<Result<_>>()?,
                dfsz: dfsz_envelope(m_a)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ScanTable {
        scenarios: scenarios.iter().map(|(n, _)| n.clone()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn threshold_boundary_and_examples() {
        let bm = 1e-22;
        assert!(detection_threshold(5.0 * bm, bm));
        assert!(!detection_threshold(0.0, 1e-22));
        assert!(detection_threshold(1e-21, 1e-22));
        assert!(!detection_threshold(4.999e-22, 1e-22));
    }

    #[test]
    fn snr_scalings() {
        let a = AxionParams::default();
        let q = QubitConfig::default();
        let s = DeviceScenario { entangled: false, ..DeviceScenario::benchmark() };
        let one = snr_amp(&s, &a, &q).unwrap();
        let four = snr_amp(&DeviceScenario { n: 4.0 * s.n, ..s }, &a, &q).unwrap();
        assert_relative_eq!(four, 2.0 * one, max_relative = 1e-14);
        let ent = snr_amp(&DeviceScenario { entangled: true, ..s }, &a, &q).unwrap();
        assert_relative_eq!(ent / one, s.n.sqrt(), max_relative = 1e-14);
        assert_eq!(snr_amp(&s, &a.with_coupling(0.0), &q).unwrap(), 0.0);
    }

    #[test]
    fn beta_min_product_is_instrumental() {
        let s = DeviceScenario::benchmark();
        let b = beta_min(&s, 28e9, 7.25e8).unwrap();
        assert_relative_eq!(b * s.enhancement() * 7.25e8, 28e9 * 1e-7, max_relative = 1e-14);
        let perfect = DeviceScenario { eta_b: 0.0, ..s };
        assert_eq!(beta_min(&perfect, 28e9, 7.25e8).unwrap(), 0.0);
        assert!(beta_min(&s, 28e9, 0.0).is_err());
    }

    #[test]
    fn dfsz_examples() {
        let m = DfszModel::new(1.0, 1e9, DfszVariant::I).unwrap();
        assert_relative_eq!(m.c_e(), 1.0 / 6.0, max_relative = 1e-15);
        // (1/6)·0.51099895e-3 GeV / 1e9 GeV
        assert_relative_eq!(dfsz_band(&m).unwrap(), 8.516_649_166_666_667e-14, max_relative = 1e-12);
        let b = 0.37f64;
        let one = DfszModel::new(b.tan(), 1e10, DfszVariant::I).unwrap();
        let two = DfszModel::new((std::f64::consts::FRAC_PI_2 - b).tan(), 1e10, DfszVariant::II).unwrap();
        assert_relative_eq!(dfsz_band(&one).unwrap(), dfsz_band(&two).unwrap(), max_relative = 1e-12);
        assert!(DfszModel::new(0.0, 1e9, DfszVariant::I).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = log_mass_grid(1e-6, 1e-3, 31).unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[30], 1e-3);
        assert!(log_mass_grid(1e-6, 1e-3, 0).is_err());
        assert_eq!(log_mass_grid(2e-6, 1e-3, 1).unwrap(), vec![2e-6]);
    }

    #[test]
    fn scan_shape() {
        let sc = vec![("current".to_string(), DeviceScenario::current())];
        let t = scan(&[3e-6], &sc, &AxionParams::default(), &QubitConfig::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.to_csv().lines().count(), 2);
        assert!(t.to_csv().starts_with("m_a_eV,f_axion_Hz,g_ae_limit_current_dimensionless,"));
        assert!(scan(&[], &sc, &AxionParams::default(), &QubitConfig::default()).is_err());
    }
}
