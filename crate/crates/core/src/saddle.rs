//! Saddle points of a potential: exp(w_i dPhi/dw_i) = 1 for every free
//! variable, continuation in the colors, completeness residuals.
//!
//! Newton runs in log-coordinates zeta = log w with a central-difference
//! Jacobian. Steps are minimum-norm least-squares solutions from an SVD,
//! so the flat directions that diagram potentials carry beyond the global
//! scaling do not stall the iteration.

use crate::potential::Potential;
use crate::volume;
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

const TWO_PI_I: C64 = C64 { re: 0.0, im: 2.0 * PI };

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branches {
    /// k_i = nearest integer to Im(grad_i)/2pi, re-chosen at every iterate
    Auto,
    /// one integer per variable; the gauge entry is ignored
    Fixed(Vec<i64>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub branches: Branches,
    /// singular values below rank_rtol * max are dropped
    pub rank_rtol: f64,
    /// false: fail on condition > 1e12 or a dropped singular value instead
    /// of taking least-squares steps
    pub pseudo_inverse: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            fd_step: 1e-7,
            branches: Branches::Auto,
            rank_rtol: 1e-8,
            pseudo_inverse: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub a: Vec<C64>,
    pub w: Vec<C64>,
    pub gauge: Option<usize>,
    pub branches: Vec<i64>,
    pub residual: f64,
    pub jacobian_condition: f64,
    pub jacobian_rank: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl SaddlePoint {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("saddle point json: {e}")))
    }
}

struct System<'a> {
    pot: &'a dyn Potential,
    a: &'a [C64],
    free: Vec<usize>,
    n: usize,
    gauge: Option<usize>,
}

impl System<'_> {
    fn w_of(&self, zeta: &[C64]) -> Vec<C64> {
        let mut w = vec![C64::new(1.0, 0.0); self.n];
        for (z, &i) in zeta.iter().zip(&self.free) {
            w[i] = z.exp();
        }
        w
    }

    fn grad(&self, zeta: &[C64]) -> Result<Vec<C64>> {
        let ev = self.pot.evaluate(self.a, &self.w_of(zeta))?;
        Ok(self.free.iter().map(|&i| ev.grad_w[i]).collect())
    }

    fn branches_for(&self, g: &[C64], br: &Branches) -> Vec<i64> {
        match br {
            Branches::Auto => g.iter().map(|z| (z.im / (2.0 * PI)).round() as i64).collect(),
            Branches::Fixed(k) => self.free.iter().map(|&i| k[i]).collect(),
        }
    }

    fn residual_vec(g: &[C64], k: &[i64]) -> Vec<C64> {
        g.iter().zip(k).map(|(z, &k)| z - TWO_PI_I * k as f64).collect()
    }

    fn jacobian(&self, zeta: &[C64], h: f64) -> Result<DMatrix<C64>> {
        let m = zeta.len();
        let mut jac = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
        let mut zp = zeta.to_vec();
        for j in 0..m {
            zp[j] = zeta[j] + h;
            let gp = self.grad(&zp)?;
            zp[j] = zeta[j] - h;
            let gm = self.grad(&zp)?;
            zp[j] = zeta[j];
            for i in 0..m {
                let mut d = gp[i] - gm[i];
                // a log cut inside the stencil shows up as a 2 pi i jump
                d.im -= 2.0 * PI * (d.im / (2.0 * PI)).round();
                jac[(i, j)] = d / (2.0 * h);
            }
        }
        Ok(jac)
    }
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Damped Newton on `w_i dPhi/dw_i - 2 pi i k_i = 0` over the free
/// variables. Non-convergence is reported through `converged = false`.
pub fn solve(pot: &dyn Potential, a: &[C64], w0: &[C64], opts: &SolveOptions) -> Result<SaddlePoint> {
    let n = pot.var_count();
    if w0.len() != n {
        return Err(Error::Invalid(format!("expected {n} initial values, got {}", w0.len())));
    }
    if a.len() != pot.color_count() {
        return Err(Error::Invalid(format!(
            "expected {} colors, got {}",
            pot.color_count(),
            a.len()
        )));
    }
    if let Branches::Fixed(k) = &opts.branches {
        if k.len() != n {
            return Err(Error::Invalid("one branch integer per variable expected".into()));
        }
    }
    let gauge = pot.gauge();
    let scale = gauge.map(|g| w0[g]).unwrap_or(C64::new(1.0, 0.0));
    if scale.norm() == 0.0 || w0.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::Invalid("initial values must be nonzero".into()));
    }
    let free: Vec<usize> = (0..n).filter(|&i| Some(i) != gauge).collect();
    let sys = System {
        pot,
        a,
        free: free.clone(),
        n,
        gauge,
    };
    let mut zeta: Vec<C64> = free.iter().map(|&i| (w0[i] / scale).ln()).collect();
    let mut g = sys.grad(&zeta)?;
    let mut k = sys.branches_for(&g, &opts.branches);
    let mut f = System::residual_vec(&g, &k);
    let mut cond = 1.0;
    let mut rank = free.len();
    let mut iterations = 0;

    while max_abs(&f) >= opts.tol && iterations < opts.max_iter {
        let jac = sys.jacobian(&zeta, opts.fd_step)?;
        if jac.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::RankDeficient(f64::INFINITY));
        }
        let svd = jac.svd(true, true);
        let sv = &svd.singular_values;
        let smax = sv.max();
        let smin = sv.min();
        cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if smax == 0.0 {
            return Err(Error::RankDeficient(f64::INFINITY));
        }
        let cut = opts.rank_rtol * smax;
        rank = sv.iter().filter(|&&s| s > cut).count();
        if !opts.pseudo_inverse && (cond > 1e12 || rank < sv.len()) {
            return Err(Error::RankDeficient(cond));
        }
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|z| -z));
        let step = svd
            .solve(&rhs, cut)
            .map_err(|e| Error::Domain(format!("svd solve: {e}")))?;

        let f_norm = norm2(&f);
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= 2f64.powi(-20) {
            let trial: Vec<C64> = zeta.iter().zip(step.iter()).map(|(z, s)| z + s * lambda).collect();
            if let Ok(gt) = sys.grad(&trial) {
                let kt = match opts.branches {
                    Branches::Auto => sys.branches_for(&gt, &opts.branches),
                    Branches::Fixed(_) => k.clone(),
                };
                let ft = System::residual_vec(&gt, &kt);
                let nt = norm2(&ft);
                if nt.is_finite() && nt < f_norm {
                    accepted = Some((trial, gt, kt, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((zt, gt, kt, ft)) => {
                zeta = zt;
                g = gt;
                k = kt;
                f = ft;
            }
            None => break,
        }
    }
    let _ = g;
    let residual = max_abs(&f);
    let mut branches = vec![0i64; n];
    for (kk, &i) in k.iter().zip(&free) {
        branches[i] = *kk;
    }
    Ok(SaddlePoint {
        a: a.to_vec(),
        w: sys.w_of(&zeta),
        gauge: sys.gauge,
        branches,
        residual,
        jacobian_condition: cond,
        jacobian_rank: rank,
        iterations,
        converged: residual < opts.tol,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Strategy {
    /// every free variable at e^{-i pi/2}
    Uniform,
    /// `count` phase vectors on (-pi, 0) from a shifted Kronecker sequence
    Seeded { seed: u64, count: usize },
    /// the w of a saved saddle point
    File(PathBuf),
    Given(Vec<C64>),
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(Strategy::Uniform);
        }
        if let Some(rest) = s.strip_prefix("seeded:") {
            let mut it = rest.split(':');
            let seed = it
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad seed in '{s}'")))?;
            let count = match it.next() {
                Some(c) => c.parse().map_err(|_| Error::Parse(format!("bad count in '{s}'")))?,
                None => 16,
            };
            return Ok(Strategy::Seeded { seed, count });
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Strategy::File(PathBuf::from(path)));
        }
        Err(Error::Parse(format!("unknown initial-guess strategy '{s}'")))
    }
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const PRIMES: [f64; 16] = [
    2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0, 47.0, 53.0,
];

/// Deterministic list of starting points.
pub fn initial_guess(pot: &dyn Potential, strategy: &Strategy) -> Result<Vec<Vec<C64>>> {
    let n = pot.var_count();
    let gauge = pot.gauge();
    let fill = |phase: &dyn Fn(usize) -> f64| -> Vec<C64> {
        (0..n)
            .map(|i| {
                if Some(i) == gauge {
                    C64::new(1.0, 0.0)
                } else {
                    C64::from_polar(1.0, phase(i))
                }
            })
            .collect()
    };
    match strategy {
        Strategy::Uniform => Ok(vec![fill(&|_| -PI / 2.0)]),
        Strategy::Seeded { seed, count } => {
            let mut st = *seed;
            let offsets: Vec<f64> = (0..n).map(|_| (splitmix(&mut st) >> 11) as f64 / (1u64 << 53) as f64).collect();
            let mut out = Vec::with_capacity(*count);
            for k in 1..=*count {
                out.push(fill(&|i| {
                    let alpha = PRIMES[i % PRIMES.len()].sqrt().fract()
                        + (i / PRIMES.len()) as f64 * 0.5f64.sqrt();
                    let u = (offsets[i] + k as f64 * alpha).fract();
                    -PI * (0.02 + 0.96 * u)
                }));
            }
            Ok(out)
        }
        Strategy::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("reading {}: {e}", path.display())))?;
            let sp = SaddlePoint::from_json(&text)?;
            if sp.w.len() != n {
                return Err(Error::Invalid("saved saddle has the wrong variable count".into()));
            }
            Ok(vec![sp.w])
        }
        Strategy::Given(w) => {
            if w.len() != n {
                return Err(Error::Invalid("initial point has the wrong variable count".into()));
            }
            Ok(vec![w.clone()])
        }
    }
}

/// Score used to pick the geometric solution: tetrahedral volume when the
/// potential has shapes, the optimistic limit otherwise.
pub fn volume_score(pot: &dyn Potential, sp: &SaddlePoint) -> Option<f64> {
    if !sp.converged {
        return None;
    }
    match volume::tetra_volume_at(pot, &sp.a, &sp.w) {
        Some(r) => r.ok(),
        None => volume::optimistic_limit(pot, sp).ok(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Multistart {
    pub candidates: Vec<SaddlePoint>,
    pub scores: Vec<Option<f64>>,
    pub best: Option<usize>,
}

/// Solves from every start (in parallel, merged in start order) and picks
/// the converged candidate with the largest volume. Ties go to the
/// earliest start.
pub fn multistart(pot: &dyn Potential, a: &[C64], starts: &[Vec<C64>], opts: &SolveOptions) -> Multistart {
    let results: Vec<Option<SaddlePoint>> = starts
        .par_iter()
        .map(|w0| solve(pot, a, w0, opts).ok())
        .collect();
    let candidates: Vec<SaddlePoint> = results.into_iter().flatten().collect();
    let scores: Vec<Option<f64>> = candidates.iter().map(|c| volume_score(pot, c)).collect();
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(v) = s {
            if best.is_none_or(|b| *v > scores[b].unwrap() + 1e-9) {
                best = Some(i);
            }
        }
    }
    Multistart {
        candidates,
        scores,
        best,
    }
}

/// Geometric saddle from the default starts: uniform plus 64 seeded.
pub fn geometric_saddle(pot: &dyn Potential, a: &[C64], opts: &SolveOptions) -> Result<SaddlePoint> {
    let mut starts = initial_guess(pot, &Strategy::Uniform)?;
    starts.extend(initial_guess(pot, &Strategy::Seeded { seed: 42, count: 64 })?);
    let ms = multistart(pot, a, &starts, opts);
    match ms.best {
        Some(b) => Ok(ms.candidates[b].clone()),
        None => Err(Error::NoConvergence("no start converged".into())),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationPath {
    pub s: Vec<f64>,
    pub points: Vec<SaddlePoint>,
}

#[derive(Clone, Debug)]
pub struct ContinuationOptions {
    pub solve: SolveOptions,
    /// largest allowed change of any log w between accepted points
    pub step_bound: f64,
    /// number of bisections of the nominal step before giving up
    pub max_bisections: u32,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            step_bound: 0.5,
            max_bisections: 10,
        }
    }
}

fn log_distance(w1: &[C64], w2: &[C64]) -> f64 {
    w1.iter()
        .zip(w2)
        .map(|(a, b)| (a / b).ln().norm())
        .fold(0.0, f64::max)
}

/// Predictor (previous w) / corrector (solve) continuation along the
/// straight segment from `a_from` to `a_to`.
pub fn continue_in_colors(
    pot: &dyn Potential,
    a_from: &[C64],
    a_to: &[C64],
    steps: usize,
    seed: &SaddlePoint,
    opts: &ContinuationOptions,
) -> Result<ContinuationPath> {
    if !seed.converged {
        return Err(Error::Invalid("continuation seed is not converged".into()));
    }
    if a_from.len() != a_to.len() || a_from.len() != pot.color_count() {
        return Err(Error::Invalid("color vector length mismatch".into()));
    }
    let mut path = ContinuationPath {
        s: vec![0.0],
        points: vec![seed.clone()],
    };
    let same = a_from.iter().zip(a_to).all(|(x, y)| x == y);
    if steps == 0 || same {
        return Ok(path);
    }
    let at = |s: f64| -> Vec<C64> {
        a_from
            .iter()
            .zip(a_to)
            .map(|(x, y)| x + (y - x) * s)
            .collect()
    };
    let nominal = 1.0 / steps as f64;
    let min_step = nominal / 2f64.powi(opts.max_bisections as i32);
    let mut s = 0.0;
    let mut h = nominal;
    while s < 1.0 - 1e-15 {
        let target = if s + h > 1.0 - 1e-12 { 1.0 } else { s + h };
        let prev = path.points.last().unwrap();
        let mut sopts = opts.solve.clone();
        if let Branches::Fixed(_) = sopts.branches {
            sopts.branches = Branches::Fixed(prev.branches.clone());
        }
        let a_t = at(target);
        let ok = match solve(pot, &a_t, &prev.w, &sopts) {
            Ok(sp) if sp.converged && log_distance(&sp.w, &prev.w) < opts.step_bound => Some(sp),
            _ => None,
        };
        match ok {
            Some(mut sp) => {
                if target == 1.0 {
                    sp.a = a_to.to_vec();
                }
                path.s.push(target);
                path.points.push(sp);
                s = target;
                h = (h * 2.0).min(nominal);
            }
            None => {
                h *= 0.5;
                if h < min_step {
                    return Err(Error::ContinuationStuck {
                        s,
                        path: Box::new(path),
                    });
                }
            }
        }
    }
    Ok(path)
}

/// |exp(grad_a_i / (pi i)) - 1| per component.
pub fn completeness_residual(pot: &dyn Potential, sp: &SaddlePoint) -> Result<Vec<f64>> {
    let ev = pot.evaluate(&sp.a, &sp.w)?;
    Ok(ev
        .grad_a
        .iter()
        .map(|g| ((g / C64::new(0.0, PI)).exp() - 1.0).norm())
        .collect())
}
