//! Tabulated external bound on `g_ae`, shown alongside projected limits.

const BUNDLED: &str = include_str!("../data/stellar_cooling.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct StellarBound {
    /// `(m_a, g_ae)` pairs sorted by mass.
    points: Vec<(f64, f64)>,
}

impl StellarBound {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled stellar table is well formed")
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut points = Vec::new();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            let (m, g) = line
                .split_once(',')
                .ok_or_else(|| format!("line {}: expected two columns", i + 1))?;
            let m: f64 = m.trim().parse().map_err(|e| format!("line {}: {e}", i + 1))?;
            let g: f64 = g.trim().parse().map_err(|e| format!("line {}: {e}", i + 1))?;
            if !(m > 0.0 && g > 0.0) {
                return Err(format!("line {}: values must be positive", i + 1));
            }
            points.push((m, g));
        }
        if points.is_empty() {
            return Err("no data rows".into());
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { points })
    }

    /// Log-log interpolation, clamped to the end values outside the table.
    pub fn at(&self, m_a: f64) -> f64 {
        let p = &self.points;
        if m_a <= p[0].0 {
            return p[0].1;
        }
        if m_a >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let k = p.partition_point(|(m, _)| *m <= m_a);
        let ((m0, g0), (m1, g1)) = (p[k - 1], p[k]);
        let f = (m_a.ln() - m0.ln()) / (m1.ln() - m0.ln());
        (g0.ln() + f * (g1.ln() - g0.ln())).exp()
    }
}
