//! Bessel functions of the first kind, integer order.
//!
//! Ascending series below `x = 15`, Miller's backward recurrence above,
//! where the series loses too many digits to cancellation.

const SERIES_LIMIT: f64 = 15.0;

/// `J_n(x)` for `n = 0..=n_max`, `x ≥ 0`.
pub fn bessel_j_upto(n_max: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "bessel argument must be finite and non-negative");
    if x == 0.0 {
        let mut out = vec![0.0; n_max + 1];
        out[0] = 1.0;
        return out;
    }
    if x < SERIES_LIMIT {
        (0..=n_max).map(|n| series(n, x)).collect()
    } else {
        miller(n_max, x)
    }
}

/// `J_n(x)` for a single order.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_j_upto(n, x)[n]
}

fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!, built incrementally to stay in range for large n.
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-3 * sum.abs().max(f64::MIN_POSITIVE) && k as f64 > half {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let top = n_max.max(x as usize);
    let mut m = top + 30 + (50.0 * (top as f64)).sqrt() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut out = vec![0.0; n_max + 1];
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k, arbitrary seed
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let prev = 2.0 * k as f64 / x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
        let order = k - 1;
        if order <= n_max {
            out[order] = cur;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * cur;
        }
    }
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}
