use proptest::prelude::*;
use spinaxion_core::physics::{axion_frequency, effective_field, modulation_index};
use spinaxion_core::sensitivity::{dfsz_envelope, log_mass_grid};
use spinaxion_core::{
    beta_min, detection_threshold, g_ae_limit, scan, snr_amp, AxionParams, DeviceScenario, QubitConfig,
};

fn scenario() -> impl Strategy<Value = DeviceScenario> {
    (0.0f64..7.0, 0.0f64..7.0, -6.0f64..8.0, -9.0f64..-5.0, any::<bool>()).prop_map(|(q, n, t, eta, ent)| {
        DeviceScenario {
            q: 10f64.powf(q),
            n: 10f64.powf(n).round().max(1.0),
            t: 10f64.powf(t),
            eta_b: 10f64.powf(eta),
            t2: 1e-4,
            entangled: ent,
        }
    })
}

fn beta_of(a: &AxionParams, q: &QubitConfig) -> f64 {
    modulation_index(q.gamma, effective_field(a, q), axion_frequency(a)).unwrap()
}

/// Smallest coupling passing the threshold, by bisection in log space.
fn bisect_limit(m_a: f64, s: &DeviceScenario, q: &QubitConfig) -> f64 {
    let passes = |log_g: f64| {
        let a = AxionParams { m_a, g_ae: 10f64.powf(log_g), ..AxionParams::default() };
        let bm = beta_min(s, q.gamma, axion_frequency(&a)).unwrap();
        detection_threshold(beta_of(&a, q), bm)
    };
    let (mut lo, mut hi) = (-40.0, 40.0);
    assert!(!passes(lo) && passes(hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    10f64.powf(hi)
}

#[test]
fn closed_form_limit_matches_bisection() {
    let q = QubitConfig::default();
    for s in [DeviceScenario::current(), DeviceScenario::next_generation(), DeviceScenario::benchmark()] {
        for m_a in [1e-6, 3e-6, 1e-4] {
            let closed = g_ae_limit(m_a, &s, &AxionParams::default(), &q).unwrap();
            let oracle = bisect_limit(m_a, &s, &q);
            assert!((closed / oracle - 1.0).abs() < 1e-9, "{closed:e} vs {oracle:e}");
        }
    }
}

#[test]
fn next_generation_curve_is_below_current_everywhere() {
    let masses = log_mass_grid(1e-6, 1e-3, 61).unwrap();
    let sc = vec![
        ("current".to_string(), DeviceScenario::current()),
        ("next_generation".to_string(), DeviceScenario::next_generation()),
    ];
    let t = scan(&masses, &sc, &AxionParams::default(), &QubitConfig::default()).unwrap();
    for r in &t.rows {
        assert!(r.limits[1] < r.limits[0], "m_a = {}", r.m_a);
        assert!(r.dfsz.low < r.dfsz.tan_beta_one && r.dfsz.tan_beta_one < r.dfsz.high);
    }
    let first = &t.rows[0];
    let last = t.rows.last().unwrap();
    assert!((first.f_axion / 241.8e6 - 1.0).abs() < 1e-3);
    assert!((last.f_axion / 241.8e9 - 1.0).abs() < 1e-3);
}

#[test]
fn dfsz_envelope_scales_inversely_with_decay_constant() {
    let a = dfsz_envelope(1e-6).unwrap();
    let b = dfsz_envelope(1e-5).unwrap();
    assert!((b.tan_beta_one / a.tan_beta_one - 10.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn entanglement_gain_is_sqrt_n(s in scenario()) {
        let (a, q) = (AxionParams::default(), QubitConfig::default());
        let ent = snr_amp(&DeviceScenario { entangled: true, ..s }, &a, &q).unwrap();
        let sql = snr_amp(&DeviceScenario { entangled: false, ..s }, &a, &q).unwrap();
        prop_assert!((ent / sql / s.n.sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_min_product_is_constant(s in scenario(), f in 1e6f64..1e12, gamma in 1e9f64..1e11) {
        let b = beta_min(&s, gamma, f).unwrap();
        let product = b * s.q * s.n_eff() * s.t.sqrt() * f;
        prop_assert!((product / (gamma * s.eta_b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_over_beta_min_is_the_snr(s in scenario(), m_a in 1e-6f64..1e-3, g in 1e-16f64..1e-10) {
        let a = AxionParams { m_a, g_ae: g, ..AxionParams::default() };
        let q = QubitConfig::default();
        let ratio = beta_of(&a, &q) / beta_min(&s, q.gamma, axion_frequency(&a)).unwrap();
        prop_assert!((ratio / snr_amp(&s, &a, &q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_scale_invariant(r in 0.01f64..100.0, bm in 1e-30f64..1e-10, c in 1e-10f64..1e10) {
        prop_assume!((r - 5.0).abs() > 1e-6);
        let beta = r * bm;
        prop_assert_eq!(detection_threshold(beta, bm), detection_threshold(c * beta, c * bm));
    }

    #[test]
    fn limit_inverts_the_threshold(s in scenario(), m_a in 1e-6f64..1e-3) {
        let q = QubitConfig::default();
        let g = g_ae_limit(m_a, &s, &AxionParams::default(), &q).unwrap();
        let a = AxionParams { m_a, g_ae: g, ..AxionParams::default() };
        let bm = beta_min(&s, q.gamma, axion_frequency(&a)).unwrap();
        prop_assert!((beta_of(&a, &q) / (5.0 * bm) - 1.0).abs() < 1e-10);
        let other = g_ae_limit(m_a * 7.0, &s, &AxionParams::default(), &q).unwrap();
        prop_assert!((other / g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn limit_is_monotone_in_q_n_t(s in scenario(), k in 1.0f64..100.0) {
        let (a, q) = (AxionParams::default(), QubitConfig::default());
        let base = g_ae_limit(3e-6, &s, &a, &q).unwrap();
        for bigger in [
            DeviceScenario { q: s.q * k, ..s },
            DeviceScenario { n: s.n * k, ..s },
            DeviceScenario { t: s.t * k, ..s },
        ] {
            prop_assert!(g_ae_limit(3e-6, &bigger, &a, &q).unwrap() <= base);
        }
    }
}
