use std::path::PathBuf;

use proptest::prelude::*;
use spinaxion_cli::{load_config, parse_config, CliError, Overrides};
use spinaxion_core::NoiseConfig;

fn reference_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../config/reference.toml")
}

fn config_fields(text: &str) -> Vec<String> {
    match parse_config(text, &Overrides::default()) {
        Err(CliError::Config { fields, .. }) => fields,
        Err(other) => panic!("expected a config error, got {other}"),
        Ok(_) => panic!("expected a config error, config loaded"),
    }
}

#[test]
fn bundled_reference_config_loads_without_defaults() {
    let cfg = load_config(Some(&reference_config()), &Overrides::default()).unwrap();
    assert_eq!(cfg.defaulted, vec!["run.out_dir", "spectral.segment_len"]);
    assert!(cfg.sidebands_observable);
    assert_eq!(cfg.amplitude_scale, 1e18);
    assert_eq!(cfg.grid.n_samples(), 90_000);
    assert!((cfg.signal.f_main - 14e9).abs() < 1.0);
    assert!(cfg.notes.is_empty());
}

#[test]
fn empty_file_takes_every_default() {
    let cfg = parse_config("", &Overrides::default()).unwrap();
    for key in ["axion.m_a", "qubit.b0", "grid.dt", "noise.white_amp", "filter.f_low", "run.seed"] {
        assert!(cfg.defaulted.iter().any(|k| k == key), "{key} not flagged");
    }
    let reference = load_config(Some(&reference_config()), &Overrides::default()).unwrap();
    assert_eq!(cfg.axion, reference.axion);
    assert_eq!(cfg.noise, reference.noise);
}

#[test]
fn default_scale_follows_the_scenario_and_is_flagged() {
    let cfg = parse_config("", &Overrides::default()).unwrap();
    // benchmark scenario: Q·N·√(t/T2) = 1e5·1e6·1
    assert_eq!(cfg.amplitude_scale, 1e11);
    assert!(!cfg.sidebands_observable);
    assert!(cfg.notes.iter().any(|n| n.contains("amplitude_scale defaulted")));
    assert!(cfg.notes.iter().any(|n| n.contains("not be visible")));
}

#[test]
fn equivalent_files_share_a_hash() {
    let explicit = std::fs::read_to_string(reference_config()).unwrap();
    let a = parse_config(&explicit, &Overrides::default()).unwrap();
    let b = parse_config(
        "[run]\namplitude_scale = 1e18\n[filter]\nf_low = 12.6e9\nf_high = 15.4e9\n",
        &Overrides::default(),
    )
    .unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.source_sha256, b.source_sha256);
    let c = parse_config(&explicit, &Overrides { seed: Some(43), ..Default::default() }).unwrap();
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn unknown_keys_are_named() {
    assert_eq!(config_fields("[axion]\nm_b = 1.0\n"), vec!["axion.m_b"]);
    assert_eq!(config_fields("[nosie]\nwhite_amp = 1.0\n"), vec!["nosie"]);
}

#[test]
fn wrong_types_are_named() {
    assert_eq!(config_fields("[grid]\nn_samples = \"many\"\n"), vec!["grid.n_samples"]);
    assert_eq!(config_fields("[spectral]\nwindow = \"kaiser\"\n"), vec!["spectral.window"]);
}

#[test]
fn range_violations_are_named() {
    assert_eq!(config_fields("[axion]\nm_a = -1e-6\n"), vec!["axion.m_a"]);
    assert_eq!(config_fields("[qubit]\nt1 = 1e-6\nt2 = 1e-4\n"), vec!["qubit.t1"]);
    assert_eq!(config_fields("[noise]\np_spike = 1.5\n"), vec!["noise.p_spike"]);
    assert_eq!(config_fields("[run]\namplitude_scale = 0.5\n"), vec!["run.amplitude_scale"]);
    assert_eq!(config_fields("[grid]\ndt = 0.0\n"), vec!["grid.dt"]);
}

#[test]
fn noise_seed_is_rejected_in_favour_of_the_master_seed() {
    assert_eq!(config_fields("[noise]\nseed = 3\n"), vec!["noise.seed"]);
}

#[test]
fn sub_nyquist_grid_names_every_field_involved() {
    let f = config_fields("[grid]\ndt = 1e-10\n");
    assert!(f.contains(&"grid.dt".to_string()) && f.contains(&"qubit.b0".to_string()), "{f:?}");
}

#[test]
fn sideband_outside_the_pass_band_names_mass_and_edge() {
    let f = config_fields("[filter]\nf_low = 13.0e9\nf_high = 15.4e9\n");
    assert_eq!(f, vec!["axion.m_a", "filter.f_low"]);
    let f = config_fields("[filter]\nf_low = 12.6e9\nf_high = 14.9e9\n");
    assert_eq!(f, vec!["axion.m_a", "filter.f_high"]);
    let f = config_fields("[filter]\nf_low = 15e9\nf_high = 13e9\n");
    assert_eq!(f, vec!["filter.f_low", "filter.f_high"]);
}

#[test]
fn heavier_axion_pushes_sidebands_out_of_the_default_band() {
    let f = config_fields("[axion]\nm_a = 1e-5\n");
    assert_eq!(f[0], "axion.m_a");
}

#[test]
fn unknown_scan_scenario_is_rejected() {
    assert_eq!(config_fields("[scan]\nscenarios = [\"future\"]\n"), vec!["scan.scenarios"]);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_config(Some(std::path::Path::new("/nonexistent/spinaxion.toml")), &Overrides::default())
        .unwrap_err();
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn random_phase_is_seeded() {
    let a = parse_config("[run]\nrandom_phase = true\nseed = 5\n", &Overrides::default()).unwrap();
    let b = parse_config("[run]\nrandom_phase = true\nseed = 5\n", &Overrides::default()).unwrap();
    let c = parse_config("[run]\nrandom_phase = true\nseed = 6\n", &Overrides::default()).unwrap();
    assert_eq!(a.axion.phi, b.axion.phi);
    assert_ne!(a.axion.phi, c.axion.phi);
    assert!((0.0..std::f64::consts::TAU).contains(&a.axion.phi));
}

fn noise_table(n: &NoiseConfig) -> String {
    let mut v = toml::Value::try_from(n).unwrap();
    v.as_table_mut().unwrap().remove("seed");
    format!("[noise]\n{}", toml::to_string(&v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noise_section_round_trips(
        white in 0.0f64..1.0,
        pink in 0.0f64..1.0,
        p_spike in 0.0f64..1.0,
        tau in 1e-9f64..1e-3,
        temperature in 1.0f64..400.0,
    ) {
        let n = NoiseConfig {
            white_amp: white,
            pink_amp: pink,
            p_spike,
            telegraph_tau: tau,
            temperature,
            ..NoiseConfig::default()
        };
        let text = noise_table(&n);
        for key in ["white_amp", "pink_amp", "pink_fmin", "readout_sigma", "p_spike",
                    "telegraph_amp", "drift_amp", "ac_amp", "ac_freq", "temperature"] {
            prop_assert!(text.contains(&format!("{key} = ")), "{key} missing from {text}");
        }
        let cfg = parse_config(&text, &Overrides::default()).unwrap();
        prop_assert_eq!(cfg.noise, NoiseConfig { seed: cfg.seed, ..n });
        prop_assert!(!cfg.defaulted.iter().any(|k| k.starts_with("noise.")));
    }
}
