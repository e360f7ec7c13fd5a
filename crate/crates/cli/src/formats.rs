//! On-disk encodings for traces and tables.
//!
//! Binary trace layout (all little-endian):
//!
//! | offset | size | field                                      |
//! |--------|------|--------------------------------------------|
//! | 0      | 8    | magic `SXTRACE\0`                          |
//! | 8      | 2    | format version (1)                         |
//! | 10     | 1    | trace kind code                            |
//! | 11     | 1    | flags; bit 0 set when the seed is present  |
//! | 12     | 4    | reserved, zero                             |
//! | 16     | 8    | sample rate (Hz, f64)                      |
//! | 24     | 8    | time of the first sample (s, f64)          |
//! | 32     | 8    | seed (u64)                                 |
//! | 40     | 8    | sample count (u64)                         |
//! | 48     | 8·n  | samples (f64)                              |

use std::fmt::Write as _;

use spinaxion_core::{Error, Result, TimeGrid, Trace, TraceKind};

pub const MAGIC: [u8; 8] = *b"SXTRACE\0";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 48;

const FLAG_SEED: u8 = 1;

pub fn encode_trace_bin(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * trace.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(trace.kind.code());
    out.push(if trace.seed.is_some() { FLAG_SEED } else { 0 });
    out.extend_from_slice(&[0u8; 4]);
    out.extend_from_slice(&trace.sample_rate().to_le_bytes());
    out.extend_from_slice(&trace.grid.t0().to_le_bytes());
    out.extend_from_slice(&trace.seed.unwrap_or(0).to_le_bytes());
    out.extend_from_slice(&(trace.len() as u64).to_le_bytes());
    for v in &trace.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn word<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().expect("bounds checked")
}

pub fn decode_trace_bin(bytes: &[u8]) -> Result<Trace> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes(word(bytes, 8));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let kind = TraceKind::from_code(bytes[10]);
    let flags = bytes[11];
    let fs = f64::from_le_bytes(word(bytes, 16));
    let t0 = f64::from_le_bytes(word(bytes, 24));
    let seed = u64::from_le_bytes(word(bytes, 32));
    let n = u64::from_le_bytes(word(bytes, 40));
    let expected = (n as usize)
        .checked_mul(8)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format(format!("sample count {n} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "header declares {n} samples ({expected} bytes), file has {}",
            bytes.len()
        )));
    }
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::Format(format!("sample rate {fs} is not positive")));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let grid = TimeGrid::new(1.0 / fs, n as usize, t0)?;
    let trace = Trace::new(grid, values, kind)?;
    Ok(if flags & FLAG_SEED != 0 { trace.with_seed(seed) } else { trace })
}

/// Time column plus one column per trace; all traces must share a grid.
pub fn traces_csv(columns: &[(&str, &Trace)]) -> Result<String> {
    let first = columns.first().ok_or(Error::EmptyTrace)?.1;
    for (name, t) in columns {
        if t.grid != first.grid {
            return Err(Error::Format(format!("column {name} is on a different grid")));
        }
    }
    let mut out = String::with_capacity(24 * first.len() * (columns.len() + 1));
    out.push_str("time_s");
    for (name, _) in columns {
        write!(out, ",{name}_dimensionless").unwrap();
    }
    out.push('\n');
    for (i, t) in first.grid.times().enumerate() {
        write!(out, "{t:e}").unwrap();
        for (_, tr) in columns {
            write!(out, ",{:e}", tr.values[i]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Generic numeric table; `header` entries already carry their units.
pub fn table_csv(header: &[&str], columns: &[&[f64]]) -> String {
    let n = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == n));
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..n {
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{:e}", c[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Header, time column and value columns of a trace CSV.
pub type TraceColumns = (Vec<String>, Vec<f64>, Vec<Vec<f64>>);

/// Parses a CSV of trace columns written by [`traces_csv`].
pub fn parse_traces_csv(text: &str) -> Result<TraceColumns> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Format("missing header".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    if header.first().map(String::as_str) != Some("time_s") {
        return Err(Error::Format("first column must be time_s".into()));
    }
    let mut times = Vec::new();
    let mut cols = vec![Vec::new(); header.len() - 1];
    for (lineno, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            fields
                .next()
                .ok_or_else(|| Error::Format(format!("line {}: missing {what}", lineno + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))
        };
        times.push(next("time")?);
        for c in cols.iter_mut() {
            c.push(next("value")?);
        }
    }
    Ok((header, times, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_48_bytes() {
        let g = TimeGrid::new(1e-3, 4, 0.5).unwrap();
        let t = Trace::new(g, vec![1.0, 2.0, 3.0, 4.0], TraceKind::Noise).unwrap().with_seed(9);
        let b = encode_trace_bin(&t);
        assert_eq!(b.len(), HEADER_LEN + 32);
        assert_eq!(&b[..8], b"SXTRACE\0");
        assert_eq!(b[10], TraceKind::Noise.code());
        assert_eq!(b[11], FLAG_SEED);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let g = TimeGrid::new(1e-3, 4, 0.0).unwrap();
        let t = Trace::new(g, vec![0.0; 4], TraceKind::Other).unwrap();
        let b = encode_trace_bin(&t);
        assert!(decode_trace_bin(&b[..b.len() - 1]).is_err());
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(decode_trace_bin(&bad).is_err());
    }
}
