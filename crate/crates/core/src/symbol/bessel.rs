//! Order-zero Bessel function of the first kind.

use std::f64::consts::{FRAC_PI_4, PI};

/// `J₀(x)` for real `x`, accurate to about `1e-14` absolute.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 8.0 {
        series(x)
    } else if x < 25.0 {
        miller(x)
    } else {
        asymptotic(x)
    }
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized by `J₀ + 2ΣJ₂ₖ = 1`.
fn miller(x: f64) -> f64 {
    let start = 2 * (((x + 15.0 + (40.0 * x).sqrt()) / 2.0) as usize + 1);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if k == 1 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j0;
    j0 / norm
}

fn asymptotic(x: f64) -> f64 {
    let z8 = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    for k in 1..200 {
        let a = (2 * k - 1) as f64;
        let t = term * (-a * a) / (k as f64 * z8);
        if t.abs() >= term.abs() {
            break;
        }
        term = t;
        // Signs alternate within each of P and Q.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
