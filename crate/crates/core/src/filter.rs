//! Butterworth band-pass design in second-order sections, causal filtering
//! and zero-phase forward–backward filtering.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::trace::{Trace, TraceKind};

/// Fractional tail energy that defines the settling length.
pub const SETTLING_TAIL: f64 = 1e-6;

/// A sideband counts as retained when the response there is at least this (dB).
pub const RETENTION_DB: f64 = -6.0;

const MAX_IMPULSE_LEN: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterFamily {
    #[default]
    Butterworth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandpassSpec {
    pub f_low: f64,
    pub f_high: f64,
    pub order: usize,
    #[serde(default)]
    pub family: FilterFamily,
}

impl BandpassSpec {
    pub fn new(f_low: f64, f_high: f64, order: usize) -> Self {
        Self {
            f_low,
            f_high,
            order,
            family: FilterFamily::Butterworth,
        }
    }

    /// ±10 % band around a carrier, order 4.
    pub fn around(f_center: f64) -> Self {
        Self::new(0.9 * f_center, 1.1 * f_center, 4)
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(invalid("sample_rate", format!("must be positive, got {sample_rate}")));
        }
        if self.order == 0 {
            return Err(invalid("filter.order", "must be >= 1"));
        }
        if !(self.f_low.is_finite() && self.f_low > 0.0) {
            return Err(invalid("filter.f_low", format!("must be > 0, got {}", self.f_low)));
        }
        if !(self.f_high.is_finite() && self.f_high > self.f_low) {
            return Err(Error::Inconsistent {
                fields: vec!["filter.f_low".into(), "filter.f_high".into()],
                reason: format!("inverted band [{}, {}]", self.f_low, self.f_high),
            });
        }
        let nyquist = 0.5 * sample_rate;
        if self.f_high >= nyquist {
            return Err(Error::Nyquist {
                what: "filter.f_high".into(),
                frequency: self.f_high,
                nyquist,
            });
        }
        Ok(())
    }
}

/// One biquad `(b0 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)`; `a[0]` is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Section {
    /// Poles strictly inside the unit circle (Jury conditions for a quadratic).
    pub fn is_stable(&self) -> bool {
        let (a0, a1, a2) = (self.a[0], self.a[1] / self.a[0], self.a[2] / self.a[0]);
        a0 != 0.0 && a2.abs() < 1.0 && a1.abs() < 1.0 + a2
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = self.a[0] + z_inv * (self.a[1] + z_inv * self.a[2]);
        num / den
    }

    /// DC gain `Σb / Σa`.
    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }
}

/// A designed filter: cascaded sections plus the design they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRealization {
    pub spec: BandpassSpec,
    pub sample_rate: f64,
    pub sections: Vec<Section>,
    /// Samples until the impulse response keeps ≤ [`SETTLING_TAIL`] of its energy.
    pub settling_len: usize,
}

/// Direct-form II transposed state of a cascade.
#[derive(Debug, Clone)]
struct Cascade<'a> {
    sections: &'a [Section],
    state: Vec<[f64; 2]>,
}

impl<'a> Cascade<'a> {
    fn new(sections: &'a [Section]) -> Self {
        Self {
            sections,
            state: vec![[0.0; 2]; sections.len()],
        }
    }

    fn with_state(sections: &'a [Section], state: Vec<[f64; 2]>) -> Self {
        Self { sections, state }
    }

    #[inline]
    fn step(&mut self, x: f64) -> f64 {
        let mut v = x;
        for (s, z) in self.sections.iter().zip(self.state.iter_mut()) {
            let y = s.b[0] * v + z[0];
            z[0] = s.b[1] * v - s.a[1] * y + z[1];
            z[1] = s.b[2] * v - s.a[2] * y;
            v = y;
        }
        v
    }
}

pub fn design_bandpass(spec: &BandpassSpec, sample_rate: f64) -> Result<FilterRealization> {
    spec.validate(sample_rate)?;
    let n = spec.order;
    let fs2 = 2.0 * sample_rate;
    // Pre-warped analog edges (rad/s).
    let w1 = fs2 * (PI * spec.f_low / sample_rate).tan();
    let w2 = fs2 * (PI * spec.f_high / sample_rate).tan();
    let bw = w2 - w1;
    let w0_sq = w1 * w2;

    let mut analog = Vec::with_capacity(2 * n);
    for m in 0..n {
        let theta = PI * (2.0 * m as f64 + 1.0 - n as f64) / (2.0 * n as f64);
        let proto = -Complex64::from_polar(1.0, theta);
        let p = proto * (0.5 * bw);
        let root = (p * p - w0_sq).sqrt();
        analog.push(p + root);
        analog.push(p - root);
    }

    let mut gain = Complex64::new(bw.powi(n as i32) * fs2.powi(n as i32), 0.0);
    let mut upper = Vec::with_capacity(n);
    for p in &analog {
        gain /= fs2 - p;
        let z = (fs2 + p) / (fs2 - p);
        if z.im > 0.0 {
            upper.push(z);
        }
    }
    if upper.len() != n {
        return Err(Error::Numeric(format!(
            "expected {n} complex pole pairs, found {}; band too narrow or too wide for this rate",
            upper.len()
        )));
    }
    upper.sort_by(|a, b| a.norm().total_cmp(&b.norm()));

    let mut sections: Vec<Section> = upper
        .iter()
        .map(|p| Section {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -2.0 * p.re, p.norm_sqr()],
        })
        .collect();
    let k = gain.re;
    sections[0].b.iter_mut().for_each(|c| *c *= k);

    if let Some(bad) = sections.iter().position(|s| !s.is_stable()) {
        return Err(Error::Numeric(format!("section {bad} is unstable")));
    }
    let settling_len = settling_length(&sections)?;
    Ok(FilterRealization {
        spec: *spec,
        sample_rate,
        sections,
        settling_len,
    })
}

fn settling_length(sections: &[Section]) -> Result<usize> {
    const BLOCK: usize = 1024;
    let mut cascade = Cascade::new(sections);
    let mut energy = Vec::with_capacity(8 * BLOCK);
    let mut total = 0.0;
    let mut x = 1.0;
    loop {
        let mut block = 0.0;
        for _ in 0..BLOCK {
            let h = cascade.step(x);
            x = 0.0;
            energy.push(h * h);
            block += h * h;
        }
        total += block;
        if total > 0.0 && block <= 1e-16 * total {
            break;
        }
        if energy.len() >= MAX_IMPULSE_LEN {
            return Err(Error::Numeric("impulse response did not decay".into()));
        }
    }
    if total == 0.0 || !total.is_finite() {
        return Err(Error::Numeric("degenerate impulse response".into()));
    }
    let mut tail = 0.0;
    for (i, e) in energy.iter().enumerate().rev() {
        tail += e;
        if tail > SETTLING_TAIL * total {
            return Ok(i + 1);
        }
    }
    Ok(0)
}

impl FilterRealization {
    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Section::is_stable)
    }

    /// Complex frequency response at `f` (Hz).
    pub fn response(&self, f: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.sample_rate);
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    pub fn magnitude_db(&self, f: f64) -> f64 {
        20.0 * self.response(f).norm().log10()
    }

    /// Group delay at `f`, in samples.
    pub fn group_delay(&self, f: f64) -> f64 {
        let w = 2.0 * PI * f / self.sample_rate;
        let poly_delay = |c: &[f64; 3]| {
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = Complex64::new(0.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                let e = Complex64::from_polar(*ck, -w * k as f64);
                num += e * k as f64;
                den += e;
            }
            (num / den).re
        };
        self.sections.iter().map(|s| poly_delay(&s.b) - poly_delay(&s.a)).sum()
    }

    /// Padding used by [`filter_zero_phase`] on each side.
    pub fn zero_phase_padding(&self) -> usize {
        3 * self.settling_len
    }

    /// Errors unless `f_main ± k·f_axion` for `k = 1..=n_max` all sit where the
    /// response is at least [`RETENTION_DB`].
    pub fn check_sidebands_retained(&self, f_main: f64, f_axion: f64, n_max: usize) -> Result<()> {
        for k in 1..=n_max {
            for sign in [-1.0, 1.0] {
                let f = f_main + sign * k as f64 * f_axion;
                let db = if f > 0.0 && f < 0.5 * self.sample_rate {
                    self.magnitude_db(f)
                } else {
                    f64::NEG_INFINITY
                };
                if !(db >= RETENTION_DB) {
                    return Err(Error::Inconsistent {
                        fields: vec![
                            "axion.m_a".into(),
                            if sign < 0.0 { "filter.f_low" } else { "filter.f_high" }.into(),
                        ],
                        reason: format!(
                            "sideband n = {}{k} at {f:.6e} Hz is attenuated to {db:.2} dB by the [{:.6e}, {:.6e}] Hz band",
                            if sign < 0.0 { '-' } else { '+' },
                            self.spec.f_low,
                            self.spec.f_high
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Steady-state section states for a unit step, as in `sosfilt_zi`.
    fn step_state(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let g = s.dc_gain();
                let z1 = scale * (s.b[2] - s.a[2] * g);
                let z0 = scale * (s.b[1] - s.a[1] * g) + z1;
                scale *= g;
                [z0, z1]
            })
            .collect()
    }

    fn run(&self, x: &[f64], initial: Option<f64>) -> Vec<f64> {
        let mut cascade = match initial {
            Some(x0) => Cascade::with_state(
                &self.sections,
                self.step_state().into_iter().map(|[a, b]| [a * x0, b * x0]).collect(),
            ),
            None => Cascade::new(&self.sections),
        };
        x.iter().map(|&v| cascade.step(v)).collect()
    }

    fn check_rate(&self, trace: &Trace) -> Result<()> {
        let fs = trace.sample_rate();
        if ((fs - self.sample_rate) / self.sample_rate).abs() > 1e-9 {
            return Err(Error::SampleRateMismatch {
                trace: fs,
                filter: self.sample_rate,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Parses and re-checks an exported design.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        f.spec.validate(f.sample_rate)?;
        if f.sections.is_empty() || !f.is_stable() {
            return Err(Error::Format("filter has no sections or an unstable section".into()));
        }
        Ok(f)
    }
}

/// Single forward pass from rest. Keeps the filter's delay and start-up ringing.
pub fn filter_causal(x: &Trace, h: &FilterRealization) -> Result<Trace> {
    h.check_rate(x)?;
    Ok(Trace {
        grid: x.grid,
        values: h.run(&x.values, None),
        kind: TraceKind::Filtered,
        seed: x.seed,
    })
}

/// Forward–backward filtering with odd-symmetric end padding and steady-state
/// initial conditions. The net response is `|H|²` with zero phase.
pub fn filter_zero_phase(x: &Trace, h: &FilterRealization) -> Result<Trace> {
    h.check_rate(x)?;
    let n = x.len();
    let pad = h.zero_phase_padding();
    if n <= pad {
        return Err(Error::TraceTooShort { len: n, needed: pad + 1 });
    }
    let v = &x.values;
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * v[0] - v[i]));
    ext.extend_from_slice(v);
    ext.extend((1..=pad).map(|i| 2.0 * v[n - 1] - v[n - 1 - i]));

    let mut y = h.run(&ext, Some(ext[0]));
    y.reverse();
    let mut y = h.run(&y, Some(y[0]));
    y.reverse();
    Ok(Trace {
        grid: x.grid,
        values: y[pad..pad + n].to_vec(),
        kind: TraceKind::Filtered,
        seed: x.seed,
    })
}
