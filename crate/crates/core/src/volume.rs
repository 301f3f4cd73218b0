//! Optimistic limit, tetrahedral volume and closed-form cone volumes.

use crate::potential::{Potential, TetShapes};
use crate::saddle::SaddlePoint;
use crate::specfun::{bloch_wigner, lobachevsky};
use crate::{CSum, Error, Result, C64};
use serde::Serialize;
use std::f64::consts::PI;

/// `Phi - sum_j (w_j dPhi/dw_j) log w_j` at a point.
pub fn phi_tilde(pot: &dyn Potential, a: &[C64], w: &[C64]) -> Result<C64> {
    let ev = pot.evaluate(a, w)?;
    let mut s = CSum::new();
    s.add(ev.value);
    for (g, x) in ev.grad_w.iter().zip(w) {
        s.add(-g * x.ln());
    }
    Ok(s.value())
}

pub fn optimistic_limit(pot: &dyn Potential, sp: &SaddlePoint) -> Result<f64> {
    if !sp.converged {
        return Err(Error::NoConvergence(
            "optimistic limit needs a converged saddle point".into(),
        ));
    }
    Ok(phi_tilde(pot, &sp.a, &sp.w)?.im)
}

/// Tetrahedral volume at a point, for potentials with shapes.
pub fn tetra_volume_at(pot: &dyn Potential, a: &[C64], w: &[C64]) -> Option<Result<f64>> {
    pot.shapes(a, w).map(|s| s.and_then(|s| tetrahedra_volume(&s)))
}

pub fn tetrahedra_volume(shapes: &TetShapes) -> Result<f64> {
    let mut total = 0.0;
    let mut comp = 0.0;
    for z in shapes.all() {
        let v = bloch_wigner(*z)?;
        // Kahan
        let y = v - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeReport {
    pub im_phi_tilde: f64,
    pub abs_im_phi_tilde: f64,
    pub tetra_sum: Option<f64>,
    pub agreement: Option<f64>,
    pub cone_angles: Vec<f64>,
    /// shapes with negative imaginary part, a hint of a non-geometric saddle
    pub negative_shapes: usize,
}

pub fn report(pot: &dyn Potential, sp: &SaddlePoint) -> Result<VolumeReport> {
    let im = optimistic_limit(pot, sp)?;
    let shapes = pot.shapes(&sp.a, &sp.w).transpose()?;
    let tetra = shapes.as_ref().map(tetrahedra_volume).transpose()?;
    let negative_shapes = shapes
        .as_ref()
        .map(|s| s.all().filter(|z| z.im < 0.0).count())
        .unwrap_or(0);
    Ok(VolumeReport {
        im_phi_tilde: im,
        abs_im_phi_tilde: im.abs(),
        tetra_sum: tetra,
        agreement: tetra.map(|t| (t - im).abs()),
        cone_angles: sp.a.iter().map(|a| 2.0 * PI * (1.0 - a.re)).collect(),
        negative_shapes,
    })
}

fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Volume of the figure-eight cone-manifold with cone angle `theta`,
/// the integral of arccosh(1 + cos t - cos 2t) over [theta, 2 pi / 3].
pub fn fig8_cone_volume(theta: f64) -> Result<f64> {
    fig8_cone_volume_tol(theta, 1e-12)
}

pub fn fig8_cone_volume_tol(theta: f64, tol: f64) -> Result<f64> {
    let top = 2.0 * PI / 3.0;
    if !(0.0..=top + 1e-15).contains(&theta) {
        return Err(Error::Domain(format!("cone angle {theta} outside [0, 2pi/3]")));
    }
    // t = 2pi/3 - u^2 removes the square-root behaviour at the upper end
    let g = |u: f64| {
        let t = top - u * u;
        let arg = (1.0 + t.cos() - (2.0 * t).cos()).max(1.0);
        2.0 * u * arg.acosh()
    };
    let umax = (top - theta).max(0.0).sqrt();
    Ok(simpson_adaptive(&g, 0.0, umax, tol))
}

fn delta(alpha: f64, theta: f64) -> f64 {
    lobachevsky(alpha + theta) - lobachevsky(alpha - theta)
}

/// Positive root T of T^4 - (L^2+M^2+N^2+1) T^2 - L^2 M^2 N^2 = 0 for the
/// half-angle tangents of the Borromean rings cone-manifold.
pub fn borromean_theta(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    for x in [alpha, beta, gamma] {
        if !(0.0..PI).contains(&x) {
            return Err(Error::Domain(format!("cone angle {x} outside [0, pi)")));
        }
    }
    let (l, m, n) = ((alpha / 2.0).tan(), (beta / 2.0).tan(), (gamma / 2.0).tan());
    let s = l * l + m * m + n * n + 1.0;
    let p = l * l * m * m * n * n;
    let t2 = 0.5 * (s + (s * s + 4.0 * p).sqrt());
    assert!(t2 > 0.0, "quartic has a positive root for admissible angles");
    Ok(t2.sqrt().atan())
}

pub fn borromean_cone_volume(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    let th = borromean_theta(alpha, beta, gamma)?;
    Ok(2.0
        * (delta(alpha / 2.0, th) + delta(beta / 2.0, th) + delta(gamma / 2.0, th)
            - 2.0 * delta(PI / 2.0, th)
            - delta(0.0, th)))
}
