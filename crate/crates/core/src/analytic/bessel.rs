//! Bessel functions of the first kind of small integer order.
//!
//! Three regimes: the ascending series below `x = 2`, Miller's backward
//! recurrence normalized by `J0 + 2 sum J_2k = 1` up to `x = 25`, and the
//! Hankel asymptotic expansion beyond.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

pub fn bessel_j0(x: f64) -> f64 {
    bessel_jn(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_jn(1, x)
}

pub fn bessel_j2(x: f64) -> f64 {
    bessel_jn(2, x)
}

/// `J_n(x)` for `n <= 8`.
pub fn bessel_jn(n: u32, x: f64) -> f64 {
    assert!(n <= 8, "order {n} not supported");
    if x < 0.0 {
        let v = bessel_jn(n, -x);
        return if n.is_multiple_of(2) { v } else { -v };
    }
    if x < SERIES_LIMIT {
        series(n, x)
    } else if x < ASYMPTOTIC_LIMIT {
        miller(n, x)
    } else {
        hankel(n, x)
    }
}

/// `J1(x) / x`, finite at the origin where it equals 1/2.
pub fn bessel_j1_over_x(x: f64) -> f64 {
    if x.abs() < SERIES_LIMIT {
        // sum_k (-1)^k (x/2)^(2k) / (2 k! (k+1)!)
        let q = -0.25 * x * x;
        let mut term = 0.5;
        let mut sum = term;
        for k in 1..40 {
            term *= q / (k as f64 * (k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        bessel_j1(x) / x
    }
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |acc, k| acc * half / k as f64);
    let q = -half * half;
    let mut sum = term;
    for k in 1..60 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(n: u32, x: f64) -> f64 {
    let start = 2 * ((x as usize + 52 + n as usize) / 2);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let order = k - 1;
        if order == n as usize {
            wanted = cur;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

fn hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= last || term == 0.0 {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    // chi = x - (2n + 1) pi / 4, expanded so that x is reduced by libm alone.
    let (cphi, sphi) = quarter_turns(2 * n + 1);
    let (sx, cx) = x.sin_cos();
    let cos_chi = cx * cphi + sx * sphi;
    let sin_chi = sx * cphi - cx * sphi;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// `(cos, sin)` of `k * pi / 4`.
fn quarter_turns(k: u32) -> (f64, f64) {
    let r = FRAC_1_SQRT_2;
    match k % 8 {
        0 => (1.0, 0.0),
        1 => (r, r),
        2 => (0.0, 1.0),
        3 => (-r, r),
        4 => (-1.0, 0.0),
        5 => (-r, -r),
        6 => (0.0, -1.0),
        _ => (r, -r),
    }
}

/// The first `count` positive zeros of `J1`.
pub fn bessel_j1_zeros(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| {
            let beta = (k as f64 + 0.25) * PI;
            let mut z = beta - 3.0 / (8.0 * beta) + 3.0 / (128.0 * beta.powi(3));
            for _ in 0..50 {
                let f = bessel_j1(z);
                let df = bessel_j0(z) - f / z;
                let step = f / df;
                z -= step;
                if step.abs() < 1e-15 * z {
                    break;
                }
            }
            z
        })
        .collect()
}
