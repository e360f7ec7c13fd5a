use proptest::prelude::*;
use spinaxion_cli::formats::{decode_trace_bin, encode_trace_bin, parse_traces_csv, traces_csv, HEADER_LEN};
use spinaxion_core::{TimeGrid, Trace, TraceKind};

fn kind_strategy() -> impl Strategy<Value = TraceKind> {
    prop_oneof![
        Just(TraceKind::Transverse),
        Just(TraceKind::Longitudinal),
        Just(TraceKind::Noise),
        Just(TraceKind::Filtered),
        Just(TraceKind::Other),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn binary_round_trip_is_bit_exact(
        values in prop::collection::vec(any::<f64>(), 2..300),
        dt_exp in -13.0f64..-3.0,
        t0 in -1.0f64..1.0,
        seed in prop::option::of(any::<u64>()),
        kind in kind_strategy(),
    ) {
        let grid = TimeGrid::new(10f64.powf(dt_exp), values.len(), t0).unwrap();
        let mut t = Trace::new(grid, values.clone(), kind).unwrap();
        if let Some(s) = seed {
            t = t.with_seed(s);
        }
        let bytes = encode_trace_bin(&t);
        prop_assert_eq!(bytes.len(), HEADER_LEN + 8 * values.len());
        let back = decode_trace_bin(&bytes).unwrap();
        prop_assert_eq!(back.kind, kind);
        prop_assert_eq!(back.seed, seed);
        prop_assert_eq!(back.grid.t0().to_bits(), t0.to_bits());
        prop_assert_eq!(back.sample_rate().to_bits(), t.sample_rate().to_bits());
        for (a, b) in back.values.iter().zip(&values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact(
        values in prop::collection::vec(-1e6f64..1e6, 2..200),
        tiny in prop::collection::vec(-1e-300f64..1e-300, 2..200),
    ) {
        let n = values.len().min(tiny.len());
        let grid = TimeGrid::new(2e-12, n, 0.0).unwrap();
        let a = Trace::new(grid, values[..n].to_vec(), TraceKind::Other).unwrap();
        let b = Trace::new(grid, tiny[..n].to_vec(), TraceKind::Noise).unwrap();
        let text = traces_csv(&[("signal", &a), ("noise", &b)]).unwrap();
        let (header, times, cols) = parse_traces_csv(&text).unwrap();
        prop_assert_eq!(header, vec!["time_s", "signal_dimensionless", "noise_dimensionless"]);
        for (i, t) in times.iter().enumerate() {
            prop_assert_eq!(t.to_bits(), grid.time(i).to_bits());
        }
        for (x, y) in cols[0].iter().zip(&a.values) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in cols[1].iter().zip(&b.values) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn declared_length_must_match_payload() {
    let grid = TimeGrid::new(1e-3, 3, 0.0).unwrap();
    let t = Trace::new(grid, vec![1.0, 2.0, 3.0], TraceKind::Other).unwrap();
    let mut bytes = encode_trace_bin(&t);
    bytes.extend_from_slice(&0f64.to_le_bytes());
    assert!(decode_trace_bin(&bytes).is_err());
    let mut wrong_version = encode_trace_bin(&t);
    wrong_version[8] = 2;
    assert!(decode_trace_bin(&wrong_version).is_err());
}

#[test]
fn csv_rejects_mixed_grids() {
    let a = Trace::new(TimeGrid::new(1e-3, 2, 0.0).unwrap(), vec![0.0; 2], TraceKind::Other).unwrap();
    let b = Trace::new(TimeGrid::new(2e-3, 2, 0.0).unwrap(), vec![0.0; 2], TraceKind::Other).unwrap();
    assert!(traces_csv(&[("a", &a), ("b", &b)]).is_err());
}
