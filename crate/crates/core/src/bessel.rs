//! Bessel functions J_n and I_n of integer order.

use crate::error::{Error, Result};

/// Largest accepted |x|.
pub const MAX_ARG: f64 = 700.0;

/// Below this |x| J_n is summed from its power series.
pub const SERIES_LIMIT: f64 = 5.0;

fn check(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > MAX_ARG {
        Err(Error::OverflowRange(x))
    } else {
        Ok(())
    }
}

/// (x/2)^n / n!
fn leading(n: u32, half: f64) -> f64 {
    let mut t = 1.0;
    for k in 1..=n {
        t *= half / k as f64;
    }
    t
}

/// Power series Σ s^k (x/2)^{2k+n}/(k!(k+n)!), s = ±1.
fn series(n: u32, x: f64, sign: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = leading(n, half);
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= sign * q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k as f64 > half {
            return sum;
        }
        if k > 10_000 {
            return sum;
        }
    }
}

/// Miller backward recurrence normalized by J_0 + 2 Σ J_2k = 1, for x > 0.
fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut m = (top + 30.0 + (40.0 * top).sqrt()) as u32;
    m += m % 2;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut result = 0.0;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        // cur holds j_k, next holds j_{k+1}
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == n {
            result = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    result / norm
}

/// J_n(x).
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    check(x)?;
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(n, ax, -1.0)
    } else {
        miller(n, ax)
    };
    Ok(if x < 0.0 && n % 2 == 1 { -v } else { v })
}

/// I_n(x).
pub fn bessel_i(n: u32, x: f64) -> Result<f64> {
    check(x)?;
    let v = series(n, x.abs(), 1.0);
    Ok(if x < 0.0 && n % 2 == 1 { -v } else { v })
}
