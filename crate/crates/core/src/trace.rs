//! Uniformly sampled real-valued traces.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform sampling grid `t_i = t0 + i·dt`, `i = 0..n_samples`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    n_samples: usize,
    t0: f64,
}

impl TimeGrid {
    pub fn new(dt: f64, n_samples: usize, t0: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("grid.dt", format!("must be positive, got {dt}")));
        }
        if n_samples < 2 {
            return Err(invalid("grid.n_samples", format!("need at least 2 samples, got {n_samples}")));
        }
        if !t0.is_finite() {
            return Err(invalid("grid.t0", "must be finite"));
        }
        Ok(Self { dt, n_samples, t0 })
    }

    /// Grid covering `duration` seconds at step `dt`, starting at zero.
    pub fn from_duration(duration: f64, dt: f64) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(invalid("grid.duration", format!("must be positive, got {duration}")));
        }
        let n = (duration / dt).round();
        if !(n.is_finite() && n >= 0.0) {
            return Err(invalid("grid.dt", "duration/dt is not a finite sample count"));
        }
        Self::new(dt, n as usize, 0.0)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.n_samples as f64
    }

    /// Width of one DFT bin for a full-length transform.
    pub fn frequency_resolution(&self) -> f64 {
        1.0 / self.duration()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |i| self.time(i))
    }

    /// Errors unless `frequency` lies strictly below the Nyquist limit.
    pub fn check_frequency(&self, what: &str, frequency: f64) -> Result<()> {
        if frequency.abs() < self.nyquist() {
            Ok(())
        } else {
            Err(Error::Nyquist {
                what: what.to_string(),
                frequency,
                nyquist: self.nyquist(),
            })
        }
    }
}

/// What a trace's samples represent. Decoherence envelopes depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// ⟨σx⟩ or another transverse spin component.
    Transverse,
    /// ⟨σz⟩.
    Longitudinal,
    Noise,
    Filtered,
    Other,
}

impl TraceKind {
    pub fn code(self) -> u8 {
        match self {
            TraceKind::Transverse => 1,
            TraceKind::Longitudinal => 2,
            TraceKind::Noise => 3,
            TraceKind::Filtered => 4,
            TraceKind::Other => 0,
        }
    }

    pub fn from_code(code: u8) -> Self {
        match code {
            1 => TraceKind::Transverse,
            2 => TraceKind::Longitudinal,
            3 => TraceKind::Noise,
            4 => TraceKind::Filtered,
            _ => TraceKind::Other,
        }
    }
}

/// Samples on a [`TimeGrid`], with the seed that produced them when random.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub kind: TraceKind,
    pub seed: Option<u64>,
}

impl Trace {
    pub fn new(grid: TimeGrid, values: Vec<f64>, kind: TraceKind) -> Result<Self> {
        if values.len() != grid.n_samples() {
            return Err(invalid(
                "trace.values",
                format!("{} samples for a {}-sample grid", values.len(), grid.n_samples()),
            ));
        }
        Ok(Self {
            grid,
            values,
            kind,
            seed: None,
        })
    }

    pub fn zeros(grid: TimeGrid, kind: TraceKind) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_samples()],
            kind,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.grid.sample_rate()
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn rms(&self) -> f64 {
        self.mean_square().sqrt()
    }

    /// Sample-wise sum. Grids must agree.
    pub fn add(&self, other: &Trace) -> Result<Trace> {
        if self.grid != other.grid {
            return Err(invalid("trace.grid", "cannot add traces on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Trace {
            grid: self.grid,
            values,
            kind: self.kind,
            seed: self.seed.or(other.seed),
        })
    }

    pub fn map(&self, kind: TraceKind, f: impl Fn(f64) -> f64) -> Trace {
        Trace {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            kind,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_grid_has_ninety_thousand_samples() {
        let g = TimeGrid::from_duration(0.18e-6, 2e-12).unwrap();
        assert_eq!(g.n_samples(), 90_000);
        assert!((g.frequency_resolution() - 5.555_555e6).abs() < 1.0);
        assert!((g.nyquist() - 250e9).abs() < 1.0);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 10, 0.0).is_err());
        assert!(TimeGrid::new(1e-3, 1, 0.0).is_err());
        assert!(TimeGrid::new(f64::NAN, 10, 0.0).is_err());
    }

    #[test]
    fn nyquist_check() {
        let g = TimeGrid::new(1.0, 16, 0.0).unwrap();
        assert!(g.check_frequency("f", 0.49).is_ok());
        assert!(matches!(g.check_frequency("f", 0.5), Err(Error::Nyquist { .. })));
    }

    #[test]
    fn trace_length_must_match_grid() {
        let g = TimeGrid::new(1.0, 4, 0.0).unwrap();
        assert!(Trace::new(g, vec![0.0; 3], TraceKind::Other).is_err());
    }
}
