//! The pipeline stages behind each subcommand.
//!
//! Every command recomputes its inputs from the configuration, so a single
//! config file and seed fully determine every emitted byte except manifest
//! timestamps.

use std::cell::OnceCell;

use serde_json::{json, Value};
use spinaxion_core::physics::{apply_decoherence, sigma_x_trace, sigma_z_trace};
use spinaxion_core::sensitivity::log_mass_grid;
use spinaxion_core::spectral::{
    detect_sidebands_with, lower_sideband_bands, DetectOptions, DynamicSnr, DynamicSnrOptions,
};
use spinaxion_core::{
    beta_min, compose_noise, cumulative_power, detection_threshold, dynamic_snr, estimate_psd,
    filter_causal, filter_zero_phase, scan, snr_amp, snr_db, Psd, ScanTable, SidebandReport,
    SpinState, Trace, TraceKind,
};

use crate::config::{scenario_by_name, RunConfig};
use crate::error::CliResult;
use crate::formats::{encode_trace_bin, table_csv, traces_csv};
use crate::output::RunDir;
use crate::plot::{Plot, Series, PALETTE};
use crate::stellar::StellarBound;
use crate::TraceFormat;

/// Lazily evaluated stages shared by the commands of one run.
pub struct Pipeline<'a> {
    pub cfg: &'a RunConfig,
    clean: OnceCell<Trace>,
    noise: OnceCell<Trace>,
    noisy: OnceCell<Trace>,
    causal: OnceCell<Trace>,
    zero_phase: OnceCell<Trace>,
}

fn once<T>(cell: &OnceCell<T>, f: impl FnOnce() -> CliResult<T>) -> CliResult<&T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let v = f()?;
    Ok(cell.get_or_init(|| v))
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Self {
            cfg,
            clean: OnceCell::new(),
            noise: OnceCell::new(),
            noisy: OnceCell::new(),
            causal: OnceCell::new(),
            zero_phase: OnceCell::new(),
        }
    }

    /// ⟨σx⟩ with the configured enhancement and T₂ envelope.
    pub fn clean(&self) -> CliResult<&Trace> {
        once(&self.clean, || {
            let c = self.cfg;
            let x = sigma_x_trace(&c.axion, &c.qubit, &c.grid, c.amplitude_scale)?;
            Ok(apply_decoherence(&x, &c.qubit)?)
        })
    }

    pub fn noise(&self) -> CliResult<&Trace> {
        once(&self.noise, || Ok(compose_noise(&self.cfg.grid, &self.cfg.noise)?))
    }

    /// Noise is added after the decoherence envelope.
    pub fn noisy(&self) -> CliResult<&Trace> {
        once(&self.noisy, || {
            let mut t = self.clean()?.add(self.noise()?)?;
            t.kind = TraceKind::Other;
            Ok(t.with_seed(self.cfg.seed))
        })
    }

    pub fn causal(&self) -> CliResult<&Trace> {
        once(&self.causal, || Ok(filter_causal(self.noisy()?, &self.cfg.design)?))
    }

    pub fn zero_phase(&self) -> CliResult<&Trace> {
        once(&self.zero_phase, || Ok(filter_zero_phase(self.noisy()?, &self.cfg.design)?))
    }

    pub fn psd(&self, x: &Trace) -> CliResult<Psd> {
        let sp = &self.cfg.spectral;
        Ok(estimate_psd(x, sp.window, self.cfg.segment_len(), sp.overlap)?)
    }

    pub fn sidebands(&self, psd: &Psd) -> CliResult<SidebandReport> {
        let s = &self.cfg.signal;
        let opts = DetectOptions {
            threshold_db: self.cfg.spectral.threshold_db,
            ..DetectOptions::default()
        };
        Ok(detect_sidebands_with(psd, s.f_main, s.f_axion, self.cfg.spectral.n_max, opts)?)
    }

    pub fn dynamic_snr(&self) -> CliResult<DynamicSnr> {
        let s = &self.cfg.signal;
        let (sb, nb) = lower_sideband_bands(s.f_main, s.f_axion);
        let opts = DynamicSnrOptions {
            hop: self.cfg.spectral.snr_hop,
            ..DynamicSnrOptions::default()
        };
        Ok(dynamic_snr(self.zero_phase()?, self.cfg.spectral.snr_window, sb, nb, opts)?)
    }

    pub fn scan(&self) -> CliResult<ScanTable> {
        let c = self.cfg;
        let masses = log_mass_grid(c.scan.m_min, c.scan.m_max, c.scan.points)?;
        let scenarios: Vec<_> = c
            .scan
            .scenarios
            .iter()
            .map(|n| (n.clone(), scenario_by_name(n, &c.scenario).expect("validated")))
            .collect();
        Ok(scan(&masses, &scenarios, &c.axion, &c.qubit)?)
    }
}

fn write_trace(run: &mut RunDir, fmt: TraceFormat, name: &str, stage: &str, t: &Trace) -> CliResult<()> {
    let file = format!("{name}.{}", fmt.extension());
    match fmt {
        TraceFormat::Csv => run.write(&file, stage, traces_csv(&[(name, t)])?.as_bytes())?,
        TraceFormat::Bin => run.write(&file, stage, &encode_trace_bin(t))?,
    };
    Ok(())
}

fn write_svg(run: &mut RunDir, cfg: &RunConfig, name: &str, stage: &str, plot: &Plot) -> CliResult<()> {
    if cfg.plots {
        run.write(name, stage, plot.render().as_bytes())?;
    }
    Ok(())
}

fn input_snr_db(p: &Pipeline) -> CliResult<f64> {
    let ps = p.clean()?.mean_square();
    let pn = p.noise()?.mean_square();
    Ok(if pn > 0.0 { 10.0 * (ps / pn).log10() } else { f64::INFINITY })
}

/// First `ns` nanoseconds of several traces, in ns.
fn time_plot(title: &str, traces: &[(&str, &Trace)], ns: f64) -> Plot {
    let mut p = Plot::new(title, "time (ns)", "amplitude");
    for (i, (name, t)) in traces.iter().enumerate() {
        let n = ((ns * 1e-9 / t.grid.dt()).ceil() as usize).clamp(2, t.len());
        let x = t.grid.times().take(n).map(|v| v * 1e9).collect();
        p.series.push(Series::new(*name, x, t.values[..n].to_vec(), PALETTE[i % PALETTE.len()]));
    }
    p
}

pub fn simulate(p: &Pipeline, run: &mut RunDir) -> CliResult<Value> {
    let c = p.cfg;
    write_trace(run, c.format, "clean", "simulate", p.clean()?)?;
    write_trace(run, c.format, "noise", "simulate", p.noise()?)?;
    write_trace(run, c.format, "noisy", "simulate", p.noisy()?)?;
    let fig = time_plot(
        "Spin precession: clean and noisy",
        &[("clean", p.clean()?), ("noisy", p.noisy()?)],
        1.0,
    );
    write_svg(run, c, "fig_time_traces.svg", "simulate", &fig)?;
    let s = &c.signal;
    Ok(json!({
        "f_main_Hz": s.f_main,
        "f_axion_Hz": s.f_axion,
        "b_eff_T": s.b_eff,
        "beta": s.beta,
        "scaled_depth": s.scaled_depth(c.amplitude_scale),
        "clean_rms": p.clean()?.rms(),
        "noise_rms": p.noise()?.rms(),
        "input_snr_dB": input_snr_db(p)?,
    }))
}

pub fn filter(p: &Pipeline, run: &mut RunDir) -> CliResult<Value> {
    let c = p.cfg;
    let h = &c.design;
    run.write("filter.json", "filter", h.to_json()?.as_bytes())?;
    write_trace(run, c.format, "filtered_causal", "filter", p.causal()?)?;
    write_trace(run, c.format, "filtered_zero_phase", "filter", p.zero_phase()?)?;

    let s = &c.signal;
    let nyq = c.grid.nyquist();
    let freqs: Vec<f64> = (1..2000).map(|i| nyq * i as f64 / 2000.0).collect();
    let mags: Vec<f64> = freqs.iter().map(|&f| h.magnitude_db(f)).collect();
    let ghz: Vec<f64> = freqs.iter().map(|f| f * 1e-9).collect();
    run.write(
        "filter_response.csv",
        "filter",
        table_csv(&["frequency_Hz", "magnitude_dB"], &[&freqs, &mags]).as_bytes(),
    )?;
    let mut fig = Plot::new("Band-pass magnitude response", "frequency (GHz)", "|H| (dB)");
    fig.y_range = Some((-120.0, 5.0));
    fig.series.push(Series::new("Butterworth", ghz, mags, PALETTE[0]));
    fig.vlines.push((s.f_main * 1e-9, "carrier".into()));
    fig.vlines.push((h.spec.f_low * 1e-9, "f_low".into()));
    fig.vlines.push((h.spec.f_high * 1e-9, "f_high".into()));
    write_svg(run, c, "fig_filter_response.svg", "filter", &fig)?;
    let fig = time_plot(
        "Filtered traces",
        &[("clean", p.clean()?), ("causal", p.causal()?), ("zero-phase", p.zero_phase()?)],
        1.0,
    );
    write_svg(run, c, "fig_filtered_traces.svg", "filter", &fig)?;

    let lines: Vec<Value> = (-(c.spectral.n_max as i64)..=c.spectral.n_max as i64)
        .map(|k| {
            let f = s.f_main + k as f64 * s.f_axion;
            json!({ "order": k, "frequency_Hz": f, "magnitude_dB": h.magnitude_db(f) })
        })
        .collect();
    Ok(json!({
        "f_low_Hz": h.spec.f_low,
        "f_high_Hz": h.spec.f_high,
        "order": h.spec.order,
        "sections": h.sections.len(),
        "settling_samples": h.settling_len,
        "group_delay_at_carrier_samples": h.group_delay(s.f_main),
        "group_delay_at_carrier_s": h.group_delay(s.f_main) / c.grid.sample_rate(),
        "response_at_lines": lines,
    }))
}

fn report_summary(r: &SidebandReport) -> Value {
    let found: Vec<Value> = r
        .sidebands
        .iter()
        .filter(|s| s.found)
        .map(|s| {
            json!({
                "order": s.order as i64 * s.side as i64,
                "frequency_Hz": s.line.frequency,
                "prominence_dB": s.line.prominence_db,
            })
        })
        .collect();
    json!({ "carrier_Hz": r.carrier.frequency, "found": found })
}

pub fn psd(p: &Pipeline, run: &mut RunDir) -> CliResult<Value> {
    let c = p.cfg;
    let s = &c.signal;
    let noisy = p.psd(p.noisy()?)?;
    let filtered = p.psd(p.zero_phase()?)?;
    run.write(
        "psd.csv",
        "psd",
        table_csv(
            &["frequency_Hz", "noisy_psd_per_Hz", "filtered_psd_per_Hz"],
            &[&noisy.frequencies, &noisy.power, &filtered.power],
        )
        .as_bytes(),
    )?;
    let cum = cumulative_power(&filtered);
    run.write(
        "cumulative_power.csv",
        "psd",
        table_csv(
            &["frequency_Hz", "cumulative_fraction_dimensionless"],
            &[&cum.frequencies, &cum.fraction],
        )
        .as_bytes(),
    )?;
    let r_noisy = p.sidebands(&noisy)?;
    let r_filtered = p.sidebands(&filtered)?;
    run.write_json(
        "sidebands.json",
        "psd",
        &json!({ "noisy": &r_noisy, "filtered": &r_filtered }),
    )?;

    let span = (c.spectral.n_max as f64 + 1.0) * s.f_axion;
    let ghz = |v: &[f64]| v.iter().map(|f| f * 1e-9).collect::<Vec<_>>();
    let mut fig = Plot::new("Power spectral density", "frequency (GHz)", "PSD (1/Hz)");
    fig.y_log = true;
    fig.x_range = Some(((s.f_main - span) * 1e-9, (s.f_main + span) * 1e-9));
    fig.series.push(Series::new("noisy", ghz(&noisy.frequencies), noisy.power.clone(), PALETTE[5]));
    fig.series.push(Series::new("filtered", ghz(&filtered.frequencies), filtered.power.clone(), PALETTE[0]));
    for sb in &r_filtered.sidebands {
        let tag = if sb.found { "" } else { " (missing)" };
        let label = format!("{}{}{tag}", if sb.side < 0 { "-" } else { "+" }, sb.order);
        fig.vlines.push((sb.predicted * 1e-9, label));
    }
    write_svg(run, c, "fig_psd.svg", "psd", &fig)?;
    let mut fig = Plot::new("Cumulative power (filtered)", "frequency (GHz)", "fraction of total");
    fig.y_range = Some((0.0, 1.05));
    fig.series.push(Series::new("filtered", ghz(&cum.frequencies), cum.fraction.clone(), PALETTE[0]));
    fig.vlines.push((s.f_main * 1e-9, "carrier".into()));
    write_svg(run, c, "fig_cumulative_power.svg", "psd", &fig)?;

    Ok(json!({
        "bin_width_Hz": filtered.bin_width(),
        "segments": filtered.n_segments,
        "noisy": report_summary(&r_noisy),
        "filtered": report_summary(&r_filtered),
    }))
}

pub fn snr(p: &Pipeline, run: &mut RunDir) -> CliResult<Value> {
    let c = p.cfg;
    let s = &c.signal;
    let d = p.dynamic_snr()?;
    run.write(
        "dynamic_snr.csv",
        "snr",
        table_csv(&["time_s", "snr_dB"], &[&d.times, &d.db]).as_bytes(),
    )?;
    let (sb, nb) = lower_sideband_bands(s.f_main, s.f_axion);
    let amp = snr_amp(&c.scenario, &c.axion, &c.qubit)?;
    let bm = beta_min(&c.scenario, c.qubit.gamma, s.f_axion)?;
    let analytic = json!({
        "snr_amp": amp,
        "snr_dB": snr_db(amp),
        "beta": s.beta,
        "beta_min": bm,
        "detectable": detection_threshold(s.beta, bm),
        "time_for_unit_snr_s": c.scenario.time_for_snr(1.0, s.b_eff.abs()),
    });
    let summary = json!({
        "window_samples": d.window,
        "hop_samples": d.hop,
        "signal_band_Hz": [sb.0, sb.1],
        "noise_band_Hz": [nb.0, nb.1],
        "dynamic_mean_dB": d.mean_db(),
        "dynamic_min_dB": d.min_db(),
        "dynamic_max_dB": d.max_db(),
        "input_snr_dB": input_snr_db(p)?,
        "analytic": analytic,
    });
    run.write_json("snr.json", "snr", &summary)?;

    let mut fig = Plot::new("Dynamic SNR of the lower first sideband", "time (ns)", "SNR (dB)");
    fig.series.push(Series::new(
        "windowed SNR",
        d.times.iter().map(|t| t * 1e9).collect(),
        d.db.clone(),
        PALETTE[0],
    ));
    fig.hlines.push((d.mean_db(), format!("mean {:.2} dB", d.mean_db())));
    write_svg(run, c, "fig_dynamic_snr.svg", "snr", &fig)?;
    Ok(summary)
}

pub fn sensitivity(p: &Pipeline, run: &mut RunDir) -> CliResult<Value> {
    let c = p.cfg;
    let table = p.scan()?;
    let stellar = StellarBound::bundled();
    let mut csv = String::new();
    for (i, line) in table.to_csv().lines().enumerate() {
        csv.push_str(line);
        if i == 0 {
            csv.push_str(",stellar_bound_dimensionless\n");
        } else {
            let m: f64 = line.split(',').next().and_then(|v| v.parse().ok()).expect("own csv");
            csv.push_str(&format!(",{:e}\n", stellar.at(m)));
        }
    }
    run.write("scan.csv", "scan", csv.as_bytes())?;
    run.write_json("scan.json", "scan", &table)?;

    let masses: Vec<f64> = table.rows.iter().map(|r| r.m_a).collect();
    let mut fig = Plot::new("Projected reach in g_ae", "axion mass (eV)", "g_ae");
    fig.x_log = true;
    fig.y_log = true;
    for (k, name) in table.scenarios.iter().enumerate() {
        let y = table.rows.iter().map(|r| r.limits[k]).collect();
        fig.series.push(Series::new(name.clone(), masses.clone(), y, PALETTE[k % 4]));
    }
    let band = |f: fn(&spinaxion_core::sensitivity::DfszEnvelope) -> f64| {
        table.rows.iter().map(|r| f(&r.dfsz)).collect::<Vec<_>>()
    };
    fig.series.push(Series::new("DFSZ low", masses.clone(), band(|d| d.low), PALETTE[4]).dashed());
    fig.series.push(Series::new("DFSZ tan b = 1", masses.clone(), band(|d| d.tan_beta_one), PALETTE[4]));
    fig.series.push(Series::new("DFSZ high", masses.clone(), band(|d| d.high), PALETTE[4]).dashed());
    fig.series.push(Series::new(
        "stellar (external)",
        masses.clone(),
        masses.iter().map(|&m| stellar.at(m)).collect(),
        PALETTE[5],
    ).dashed());
    write_svg(run, c, "fig_sensitivity.svg", "scan", &fig)?;

    let limits: Vec<Value> = table
        .scenarios
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let col: Vec<f64> = table.rows.iter().map(|r| r.limits[k]).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            json!({ "scenario": name, "g_ae_min": lo, "g_ae_max": hi })
        })
        .collect();
    Ok(json!({
        "points": table.rows.len(),
        "m_min_eV": c.scan.m_min,
        "m_max_eV": c.scan.m_max,
        "limits": limits,
    }))
}

pub fn demo(p: &Pipeline, run: &mut RunDir) -> CliResult<Value> {
    let c = p.cfg;
    let simulate = simulate(p, run)?;
    let z = sigma_z_trace(&SpinState::equal_superposition(), &c.grid);
    let z = apply_decoherence(&z, &c.qubit)?;
    write_trace(run, c.format, "sigma_z", "demo", &z)?;
    let mut fig = time_plot("Longitudinal component", &[("sigma_z", &z)], 5.0);
    fig.y_range = Some((-1.05, 1.05));
    write_svg(run, c, "fig_sigma_z.svg", "demo", &fig)?;
    let filter = filter(p, run)?;
    let psd = psd(p, run)?;
    let snr = snr(p, run)?;
    let scan = sensitivity(p, run)?;
    if !c.sidebands_observable {
        log::warn!("demo ran with unobservable modulation depth; the sideband report will be empty");
    }
    Ok(json!({
        "simulate": simulate,
        "filter": filter,
        "psd": psd,
        "snr": snr,
        "scan": scan,
    }))
}
