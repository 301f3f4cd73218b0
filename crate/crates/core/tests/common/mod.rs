//! Reference values computed independently of the library.
#![allow(dead_code)]

use knotvol::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn zeta_even(n: u32) -> f64 {
    if n == 1 {
        return PI * PI / 6.0;
    }
    let s = 2 * n as i32;
    let k_max = 2000;
    let mut sum = 0.0;
    for k in (1..=k_max).rev() {
        sum += (k as f64).powi(-s);
    }
    let k = k_max as f64;
    sum + k.powi(1 - s) / (s - 1) as f64 - 0.5 * k.powi(-s)
}

/// Clausen function Cl2 from its expansion around 0, after reduction to
/// (-pi, pi].
pub fn clausen2(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t == 0.0 {
        return 0.0;
    }
    let mut sum = t - t * t.abs().ln();
    let ratio = (t / (2.0 * PI)).powi(2);
    let mut pow = t * ratio;
    for n in 1..=40u32 {
        let nf = n as f64;
        sum += zeta_even(n) * pow / (nf * (2.0 * nf + 1.0));
        pow *= ratio;
    }
    sum
}

pub fn lobachevsky(theta: f64) -> f64 {
    0.5 * clausen2(2.0 * theta)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let gl = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in &gl {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// Figure-eight cone-manifold volume by Gauss-Legendre quadrature.
pub fn fig8_volume(theta: f64) -> f64 {
    let top = 2.0 * PI / 3.0;
    let g = |u: f64| {
        let t = top - u * u;
        2.0 * u * (1.0 + t.cos() - (2.0 * t).cos()).max(1.0).acosh()
    };
    integrate(g, 0.0, (top - theta).sqrt(), 200)
}

/// Borromean rings cone-manifold volume with cone angles (x, y, z).
pub fn borromean_volume(x: f64, y: f64, z: f64) -> f64 {
    let (l, m, n) = ((x / 2.0).tan(), (y / 2.0).tan(), (z / 2.0).tan());
    // bisection on the positive root of the quartic in T
    let f = |t: f64| t.powi(4) - (l * l + m * m + n * n + 1.0) * t * t - (l * m * n).powi(2);
    let (mut lo, mut hi) = (0.5, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let th = (0.5 * (lo + hi)).atan();
    let d = |al: f64| lobachevsky(al + th) - lobachevsky(al - th);
    2.0 * (d(x / 2.0) + d(y / 2.0) + d(z / 2.0) - 2.0 * d(PI / 2.0) - d(0.0))
}

/// Random point with moduli in [0.6, 1.6] and phases in (-pi, pi); the
/// first entry is 1.
pub fn random_w(r: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| {
            if k == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::from_polar(r.random_range(0.6..1.6), r.random_range(-PI..PI))
            }
        })
        .collect()
}

pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
