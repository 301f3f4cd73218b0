//! Complex dilogarithm, Bloch-Wigner and Lobachevsky functions.
//!
//! `dilog` uses the Maclaurin series on |z| <= 1/2, the reflection
//! z -> 1-z near 1, the inversion z -> 1/z outside the unit disk and a
//! Bernoulli series in -log(1-z) for the remaining annulus.

use crate::{Error, C64};
use std::f64::consts::PI;

pub const PI2_6: f64 = PI * PI / 6.0;

const MAX_SERIES_TERMS: usize = 200;

// B_n for n = 0..=26.
const BERNOULLI: [f64; 27] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
    43867.0 / 798.0,
    0.0,
    -174611.0 / 330.0,
    0.0,
    854513.0 / 138.0,
    0.0,
    -236364091.0 / 2730.0,
    0.0,
    8553103.0 / 6.0,
];

/// Sum of z^k/k^2 for |z| <= 1/2. The tail after term K is bounded by
/// |z|^(K+1) / ((K+1)^2 (1-|z|)), so stopping once a term drops below
/// 1e-17 relative keeps the absolute error under 1e-16.
fn maclaurin(z: C64) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    let mut pow = z;
    for k in 1..=MAX_SERIES_TERMS {
        let term = pow / (k * k) as f64;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm().max(1e-300) {
            break;
        }
        pow *= z;
    }
    sum
}

/// Bernoulli series sum B_n u^(n+1)/(n+1)! with u = -log(1-z).
/// Used only for |z| <= 1 and |1-z| > 1/2, where |u| < 1.8.
fn bernoulli_series(z: C64) -> C64 {
    let u = -(C64::new(1.0, 0.0) - z).ln();
    let mut sum = C64::new(0.0, 0.0);
    let mut pow = u;
    let mut fact = 1.0;
    for (n, b) in BERNOULLI.iter().enumerate() {
        fact *= (n + 1) as f64;
        if *b != 0.0 {
            sum += pow * (*b / fact);
        }
        pow *= u;
    }
    sum
}

/// Principal branch of Li2, cut along [1, inf). On the cut the sign of the
/// imaginary part (including signed zero) selects the side.
pub fn dilog(z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    if z.re == 0.0 && z.im == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if z.re == 1.0 && z.im == 0.0 {
        return C64::new(PI2_6, 0.0);
    }
    let r = z.norm();
    if r > 1.0 {
        let l = (-z).ln();
        return -dilog(z.inv()) - PI2_6 - 0.5 * l * l;
    }
    if r <= 0.5 {
        return maclaurin(z);
    }
    let w = one - z;
    if w.norm() <= 0.5 {
        return PI2_6 - z.ln() * w.ln() - maclaurin(w);
    }
    bernoulli_series(z)
}

/// Bloch-Wigner function D(z) = Im Li2(z) + log|z| arg(1-z).
pub fn bloch_wigner(z: C64) -> Result<f64, Error> {
    if z.norm() == 0.0 || (z.re == 1.0 && z.im == 0.0) {
        return Err(Error::Domain(format!("bloch_wigner undefined at {z}")));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain("bloch_wigner of non-finite argument".into()));
    }
    let arg = (C64::new(1.0, 0.0) - z).arg();
    Ok(dilog(z).im + z.norm().ln() * arg)
}

/// Lobachevsky function, half the Bloch-Wigner function on the unit circle.
pub fn lobachevsky(theta: f64) -> f64 {
    if theta < 0.0 {
        return -lobachevsky(-theta);
    }
    let mut t = theta.rem_euclid(PI);
    if t > PI / 2.0 {
        t -= PI;
    }
    if t == 0.0 {
        return 0.0;
    }
    let neg = t < 0.0;
    let z = C64::from_polar(1.0, 2.0 * t.abs());
    let v = 0.5 * dilog(z).im;
    if neg {
        -v
    } else {
        v
    }
}

/// Volume of the ideal tetrahedron with shape `z`, zero for degenerate shapes.
pub fn tetra_volume(z: C64) -> f64 {
    bloch_wigner(z).unwrap_or(0.0)
}
