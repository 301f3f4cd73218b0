//! Color sequences, growth-rate sweeps and their extrapolation.

use crate::diagram::BraidWord;
use crate::jones::{self, RootOfUnity, TvLink};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Which pairs of components cross, and which components cross themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CrossingPattern {
    pub components: usize,
    pub self_crossing: Vec<bool>,
    pub mixed: Vec<(usize, usize)>,
}

impl CrossingPattern {
    pub fn of_braid(b: &BraidWord) -> Self {
        let (comp, n) = b.strand_components();
        let mut at: Vec<usize> = (0..b.strands).collect();
        let mut pat = CrossingPattern {
            components: n,
            self_crossing: vec![false; n],
            mixed: Vec::new(),
        };
        for &(g, _) in &b.letters {
            let (l, r) = (comp[at[g - 1]], comp[at[g]]);
            if l == r {
                pat.self_crossing[l] = true;
            } else {
                let e = (l.min(r), l.max(r));
                if !pat.mixed.contains(&e) {
                    pat.mixed.push(e);
                }
            }
            at.swap(g - 1, g);
        }
        pat
    }
}

fn nearest_odd(x: f64) -> i64 {
    2 * ((x - 1.0) / 2.0).round() as i64 + 1
}

/// Odd colors `a_i(N)` near `a_i N` with `m_i = (a_i(N) - 1)/2` even on
/// self-crossing components and `m_i + m_j` even on crossing pairs.
pub fn color_sequence(a: &[f64], n: usize, pattern: &CrossingPattern) -> Result<Vec<usize>> {
    if n < 3 {
        return Err(Error::Invalid(format!("N = {n} must be at least 3")));
    }
    if a.len() != pattern.components {
        return Err(Error::Invalid("one color per component expected".into()));
    }
    for &x in a {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Invalid(format!("color {x} outside (0,1]")));
        }
    }
    let nf = n as f64;
    let top = if n % 2 == 1 { n as i64 } else { n as i64 - 1 };
    let mut col: Vec<i64> = a.iter().map(|&x| nearest_odd(x * nf).clamp(1, top)).collect();
    let bump = |c: &mut i64| {
        if *c + 2 > n as i64 {
            *c -= 2;
        } else {
            *c += 2;
        }
    };
    let m_parity = |c: i64| ((c - 1) / 2).rem_euclid(2);
    let k = pattern.components;
    let mut adj = vec![Vec::new(); k];
    for &(x, y) in &pattern.mixed {
        adj[x].push(y);
        adj[y].push(x);
    }
    let mut seen = vec![false; k];
    for root in 0..k {
        if seen[root] {
            continue;
        }
        let mut group = vec![root];
        seen[root] = true;
        let mut at = 0;
        while at < group.len() {
            for &y in &adj[group[at]] {
                if !seen[y] {
                    seen[y] = true;
                    group.push(y);
                }
            }
            at += 1;
        }
        let target = if group.iter().any(|&c| pattern.self_crossing[c]) {
            0
        } else {
            m_parity(col[root])
        };
        for &c in &group {
            if m_parity(col[c]) != target {
                bump(&mut col[c]);
            }
        }
    }
    let out: Vec<usize> = col.iter().map(|&c| c as usize).collect();
    for (c, &x) in out.iter().zip(a) {
        assert!(*c >= 1 && c % 2 == 1);
        assert!((*c as f64 / nf - x).abs() <= 3.0 / nf + 1e-12);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Evaluator {
    Fig8,
    Borromean,
    Braid { braid: BraidWord, cap: usize },
}

impl Evaluator {
    pub fn pattern(&self) -> CrossingPattern {
        match self {
            Evaluator::Fig8 => CrossingPattern::of_braid(&crate::diagram::braids::figure_eight()),
            Evaluator::Borromean => CrossingPattern::of_braid(&crate::diagram::braids::borromean()),
            Evaluator::Braid { braid, .. } => CrossingPattern::of_braid(braid),
        }
    }

    /// `ln |J|` at `t = xi_N^p`.
    pub fn log_abs(&self, colors: &[usize], root: RootOfUnity) -> Result<f64> {
        let q = root.qparam();
        match self {
            Evaluator::Fig8 => Ok(jones::jones_fig8_habiro_scaled(colors[0], &q)?.log_abs()),
            Evaluator::Borromean => {
                Ok(jones::jones_borromean_habiro_scaled(colors[0], colors[1], colors[2], &q)?.log_abs())
            }
            Evaluator::Braid { braid, cap } => Ok(jones::jones_braid(braid, colors, &q, *cap)?.norm().ln()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub n: u64,
    pub colors: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthSweep {
    pub entries: Vec<SweepEntry>,
    pub extrapolated: Option<f64>,
    pub stderr: Option<f64>,
    pub model: String,
    /// N values dropped because the evaluator refused them
    pub truncated: Vec<u64>,
}

pub const MODEL: &str = "value ~ c0 + c1 log(N)/N + c2/N";

/// Least-squares fit of `values` on {1, log N / N, 1/N}; returns the
/// intercept and its standard error.
pub fn extrapolate(ns: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    let k = ns.len();
    if k < 4 || values.len() != k {
        return Err(Error::Invalid(format!("need at least 4 sweep points, got {k}")));
    }
    let x = DMatrix::from_fn(k, 3, |i, j| match j {
        0 => 1.0,
        1 => ns[i].ln() / ns[i],
        _ => 1.0 / ns[i],
    });
    let y = DVector::from_column_slice(values);
    let xtx = x.transpose() * &x;
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::Domain("degenerate sweep design".into()))?;
    let beta = &inv * x.transpose() * &y;
    let resid = &y - &x * &beta;
    let sigma2 = resid.norm_squared() / (k - 3) as f64;
    Ok((beta[0], (sigma2 * inv[(0, 0)]).sqrt()))
}

fn finish(entries: Vec<SweepEntry>, truncated: Vec<u64>, need_fit: bool) -> Result<GrowthSweep> {
    let ns: Vec<f64> = entries.iter().map(|e| e.n as f64).collect();
    let vs: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let fit = if need_fit || entries.len() >= 4 {
        Some(extrapolate(&ns, &vs)?)
    } else {
        None
    };
    Ok(GrowthSweep {
        entries,
        extrapolated: fit.map(|f| f.0),
        stderr: fit.map(|f| f.1),
        model: MODEL.into(),
        truncated,
    })
}

/// `(2 pi |p| / N) ln |J(t = xi_N^p)|` over `n_list` with colors from
/// [`color_sequence`], extrapolated in N.
pub fn growth_rate(ev: &Evaluator, a: &[f64], p: i64, n_list: &[u64]) -> Result<GrowthSweep> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("N list must be strictly increasing".into()));
    }
    if n_list.len() < 4 {
        return Err(Error::Invalid(format!("need at least 4 sweep points, got {}", n_list.len())));
    }
    let pattern = ev.pattern();
    let results: Vec<Result<SweepEntry>> = n_list
        .par_iter()
        .map(|&n| {
            let colors = color_sequence(a, n as usize, &pattern)?;
            let root = RootOfUnity::new(n, p)?;
            let la = ev.log_abs(&colors, root)?;
            Ok(SweepEntry {
                n,
                colors,
                value: 2.0 * PI * p.unsigned_abs() as f64 / n as f64 * la,
            })
        })
        .collect();
    let mut entries = Vec::new();
    let mut truncated = Vec::new();
    for (r, &n) in results.into_iter().zip(n_list) {
        match r {
            Ok(e) => entries.push(e),
            Err(Error::CapExceeded { .. }) => truncated.push(n),
            Err(e) => return Err(e),
        }
    }
    finish(entries, truncated, true)
}

/// `(2 pi / r) ln TV_r` over odd `r`.
pub fn tv_growth(link: TvLink, r_list: &[u64]) -> Result<GrowthSweep> {
    if r_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("r list must be strictly increasing".into()));
    }
    let values: Vec<Result<SweepEntry>> = r_list
        .iter()
        .map(|&r| {
            let tv = jones::tv_sum(link, r)?;
            Ok(SweepEntry {
                n: r,
                colors: vec![],
                value: 2.0 * PI * tv.log_value / r as f64,
            })
        })
        .collect();
    finish(values.into_iter().collect::<Result<Vec<_>>>()?, vec![], false)
}
