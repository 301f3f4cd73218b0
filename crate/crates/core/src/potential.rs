//! Dilogarithm potential of a link diagram and its first derivatives.
//!
//! Each crossing contributes a constant, a log term, a product of two
//! logs and five dilogarithms of region-variable monomials. Gradients are
//! taken in logarithmic form: `grad_w[i] = w_i dPhi/dw_i`.

use crate::diagram::{Crossing, LinkDiagram};
use crate::specfun::{dilog, PI2_6};
use crate::{CSum, Error, Result, C64};
use serde::Serialize;
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, Serialize)]
pub struct PotentialEval {
    pub value: C64,
    pub grad_w: Vec<C64>,
    pub grad_a: Vec<C64>,
    pub p: i32,
}

/// Anything the saddle solver can work on.
pub trait Potential: Sync {
    fn var_count(&self) -> usize;
    fn color_count(&self) -> usize;
    /// Variable pinned to 1, if the potential is homogeneous.
    fn gauge(&self) -> Option<usize>;
    fn evaluate(&self, a: &[C64], w: &[C64]) -> Result<PotentialEval>;
    /// Tetrahedron shapes at `w`, for potentials that come from a diagram.
    fn shapes(&self, _a: &[C64], _w: &[C64]) -> Option<Result<TetShapes>> {
        None
    }
    fn name(&self) -> String;
}

/// Real colors in (0,1] as complex parameters.
pub fn colors(a: &[f64]) -> Result<Vec<C64>> {
    for &x in a {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Invalid(format!("color {x} outside (0,1]")));
        }
    }
    Ok(a.iter().map(|&x| C64::new(x, 0.0)).collect())
}

fn ea(a: C64) -> C64 {
    (I * PI * a).exp()
}

type Mono = [(usize, i32); 4];

fn mono_eval(w: &[C64], m: &Mono) -> C64 {
    let mut num = ONE;
    let mut den = ONE;
    for &(j, e) in m {
        if e > 0 {
            num *= w[j].powi(e);
        } else if e < 0 {
            den *= w[j].powi(-e);
        }
    }
    num / den
}

fn ratio(num: &[usize], den: &[usize]) -> Mono {
    let mut m: Mono = [(0, 0); 4];
    let mut n = 0;
    let mut push = |j: usize, e: i32| {
        for slot in m.iter_mut().take(n) {
            if slot.0 == j {
                slot.1 += e;
                return;
            }
        }
        m[n] = (j, e);
        n += 1;
    };
    for &j in num {
        push(j, 1);
    }
    for &j in den {
        push(j, -1);
    }
    m
}

struct Acc<'a> {
    value: CSum,
    gw: &'a mut [C64],
    ga: &'a mut [C64],
}

impl Acc<'_> {
    fn grad_mono(&mut self, m: &Mono, coef: C64) {
        for &(j, e) in m {
            if e != 0 {
                self.gw[j] += coef * e as f64;
            }
        }
    }
}

/// One crossing, p-scaled.
fn crossing_terms(
    idx: usize,
    x: &Crossing,
    a: &[C64],
    w: &[C64],
    p: i32,
    acc: &mut Acc,
) -> Result<()> {
    let [j1, j2, j3, j4] = x.regions;
    let (ca, cb) = (x.over_component, x.under_component);
    let (aa, ab) = (a[ca], a[cb]);
    let pf = p as f64;
    let sg = x.sign as f64;

    // sign * i pi p (a+b)/2 * log(w1 w3 / (w2 w4))
    let r1324 = ratio(&[j1, j3], &[j2, j4]);
    let l1324 = mono_eval(w, &r1324).ln();
    let coef = sg * I * PI * pf * (aa + ab) / 2.0;
    acc.value.add(coef * l1324);
    acc.grad_mono(&r1324, coef);
    acc.ga[ca] += sg * I * PI * pf / 2.0 * l1324;
    acc.ga[cb] += sg * I * PI * pf / 2.0 * l1324;

    // products of logs
    let (m1, m2) = if x.sign > 0 {
        (ratio(&[j2], &[j1]), ratio(&[j3], &[j2]))
    } else {
        (ratio(&[j3], &[j4]), ratio(&[j4], &[j1]))
    };
    let (l1, l2) = (mono_eval(w, &m1).ln(), mono_eval(w, &m2).ln());
    let cll = C64::new(-sg * pf, 0.0);
    acc.value.add(cll * l1 * l2);
    acc.grad_mono(&m1, cll * l2);
    acc.grad_mono(&m2, cll * l1);

    // (sign, color, monomial)
    let lis: [(f64, Option<usize>, Mono); 5] = if x.sign > 0 {
        [
            (-1.0, Some(ca), ratio(&[j4], &[j3])),
            (-1.0, Some(cb), ratio(&[j4], &[j1])),
            (1.0, None, ratio(&[j2, j4], &[j1, j3])),
            (1.0, Some(ca), ratio(&[j1], &[j2])),
            (1.0, Some(cb), ratio(&[j3], &[j2])),
        ]
    } else {
        [
            (-1.0, Some(ca), ratio(&[j1], &[j4])),
            (-1.0, Some(cb), ratio(&[j3], &[j4])),
            (-1.0, None, ratio(&[j2, j4], &[j1, j3])),
            (1.0, Some(ca), ratio(&[j2], &[j3])),
            (1.0, Some(cb), ratio(&[j2], &[j1])),
        ]
    };
    for (s, col, m) in lis.iter() {
        let e = col.map(|c| (I * PI * pf * a[c]).exp()).unwrap_or(ONE);
        let arg = e * mono_eval(w, m).powi(p);
        if (arg - ONE).norm() < 1e-14 {
            return Err(Error::Singular {
                crossing: idx,
                what: "dilogarithm argument at 1".into(),
            });
        }
        acc.value.add(*s * dilog(arg) / pf);
        let l = (ONE - arg).ln();
        acc.grad_mono(m, -*s * l);
        if let Some(c) = col {
            acc.ga[*c] += -*s * I * PI * l;
        }
    }

    acc.value.add(C64::new(-sg * PI2_6 / pf, 0.0));
    if x.is_self() {
        let t = I * PI * pf * aa;
        acc.value.add(sg * t * t / pf);
        acc.ga[ca] += sg * 2.0 * (I * PI * pf).powi(2) * aa / pf;
    }
    Ok(())
}

fn check_inputs(d: &LinkDiagram, a: &[C64], w: &[C64], p: i32) -> Result<()> {
    if p == 0 {
        return Err(Error::Invalid("p must be nonzero".into()));
    }
    if a.len() != d.component_count {
        return Err(Error::Invalid(format!(
            "expected {} colors, got {}",
            d.component_count,
            a.len()
        )));
    }
    if w.len() != d.region_count {
        return Err(Error::Invalid(format!(
            "expected {} region variables, got {}",
            d.region_count,
            w.len()
        )));
    }
    if let Some(bad) = w.iter().position(|z| z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid(format!("region variable {bad} is zero or not finite")));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid("non-finite color".into()));
    }
    Ok(())
}

/// Value and gradients of the p-scaled potential. Crossings are summed in
/// index order with compensated summation.
pub fn evaluate(d: &LinkDiagram, a: &[C64], w: &[C64], p: i32) -> Result<PotentialEval> {
    check_inputs(d, a, w, p)?;
    let mut gw = vec![C64::new(0.0, 0.0); d.region_count];
    let mut ga = vec![C64::new(0.0, 0.0); d.component_count];
    let mut acc = Acc {
        value: CSum::new(),
        gw: &mut gw,
        ga: &mut ga,
    };
    for (idx, x) in d.crossings.iter().enumerate() {
        crossing_terms(idx, x, a, w, p, &mut acc)?;
    }
    let value = acc.value.value();
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Domain("potential value not finite".into()));
    }
    Ok(PotentialEval {
        value,
        grad_w: gw,
        grad_a: ga,
        p,
    })
}

pub fn eval(d: &LinkDiagram, a: &[C64], w: &[C64], p: i32) -> Result<C64> {
    Ok(evaluate(d, a, w, p)?.value)
}

pub fn grad_w(d: &LinkDiagram, a: &[C64], w: &[C64], p: i32) -> Result<Vec<C64>> {
    Ok(evaluate(d, a, w, p)?.grad_w)
}

pub fn grad_a(d: &LinkDiagram, a: &[C64], w: &[C64], p: i32) -> Result<Vec<C64>> {
    Ok(evaluate(d, a, w, p)?.grad_a)
}

/// Potential with the framing term `-sum f_j (log alpha_j)^2`,
/// alpha_j = exp(i pi a_j). Colors may be complex here.
pub fn framed_eval(d: &LinkDiagram, a: &[C64], w: &[C64], f: &[i32]) -> Result<PotentialEval> {
    if f.len() != d.component_count {
        return Err(Error::Invalid("one framing per component expected".into()));
    }
    let mut ev = evaluate(d, a, w, 1)?;
    for (j, &fj) in f.iter().enumerate() {
        let la = I * PI * a[j];
        ev.value -= fj as f64 * la * la;
        ev.grad_a[j] -= 2.0 * fj as f64 * I * PI * la;
    }
    Ok(ev)
}

#[derive(Clone, Debug, Serialize)]
pub struct TetShapes {
    pub signs: Vec<i32>,
    /// u1..u5 for positive, v1..v5 for negative crossings
    pub per_crossing: Vec<[C64; 5]>,
}

impl TetShapes {
    pub fn all(&self) -> impl Iterator<Item = &C64> {
        self.per_crossing.iter().flat_map(|s| s.iter())
    }
}

pub fn shapes(d: &LinkDiagram, a: &[C64], w: &[C64]) -> Result<TetShapes> {
    check_inputs(d, a, w, 1)?;
    let mut per = Vec::with_capacity(d.crossings.len());
    for (idx, x) in d.crossings.iter().enumerate() {
        let [w1, w2, w3, w4] = x.regions.map(|j| w[j]);
        let e_a = ea(a[x.over_component]);
        let e_b = ea(a[x.under_component]);
        let z = if x.sign > 0 {
            [
                e_a * w1 / w2,
                w3 / (w4 * e_a),
                w2 * w4 / (w1 * w3),
                w1 / (w4 * e_b),
                e_b * w3 / w2,
            ]
        } else {
            [
                w4 / (w1 * e_a),
                e_a * w2 / w3,
                w1 * w3 / (w2 * w4),
                e_b * w2 / w1,
                w4 / (w3 * e_b),
            ]
        };
        if z.iter().any(|s| s.norm() < 1e-300 || (s - ONE).norm() < 1e-14) {
            return Err(Error::Singular {
                crossing: idx,
                what: "degenerate shape parameter".into(),
            });
        }
        per.push(z);
    }
    Ok(TetShapes {
        signs: d.crossings.iter().map(|x| x.sign).collect(),
        per_crossing: per,
    })
}

/// The diagram potential as a solver target.
#[derive(Clone, Debug)]
pub struct DiagramPotential {
    pub diagram: LinkDiagram,
    pub p: i32,
}

impl DiagramPotential {
    pub fn new(diagram: LinkDiagram) -> Self {
        Self { diagram, p: 1 }
    }
}

impl Potential for DiagramPotential {
    fn var_count(&self) -> usize {
        self.diagram.region_count
    }
    fn color_count(&self) -> usize {
        self.diagram.component_count
    }
    fn gauge(&self) -> Option<usize> {
        Some(self.diagram.unbounded_region)
    }
    fn evaluate(&self, a: &[C64], w: &[C64]) -> Result<PotentialEval> {
        evaluate(&self.diagram, a, w, self.p)
    }
    fn shapes(&self, a: &[C64], w: &[C64]) -> Option<Result<TetShapes>> {
        Some(shapes(&self.diagram, a, w))
    }
    fn name(&self) -> String {
        format!("diagram[{}]", self.diagram.braid.to_text())
    }
}

/// Single-variable potential of the figure-eight knot,
/// `-2 pi i a log x - Li2(e_a^2 x) + Li2(e_a^2 / x)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Fig8Reduced;

impl Fig8Reduced {
    /// Closed-form saddle, `|x0| = 1` for 5/6 < a < 1.
    pub fn x0(a: f64) -> C64 {
        let c = (2.0 * PI * a).cos();
        C64::new(c - 0.5, 0.0) - C64::new((c - 1.5) * (c + 0.5), 0.0).sqrt()
    }
}

impl Potential for Fig8Reduced {
    fn var_count(&self) -> usize {
        1
    }
    fn color_count(&self) -> usize {
        1
    }
    fn gauge(&self) -> Option<usize> {
        None
    }
    fn evaluate(&self, a: &[C64], w: &[C64]) -> Result<PotentialEval> {
        let (a, x) = (a[0], w[0]);
        let e2 = (2.0 * PI * I * a).exp();
        let (u, v) = (e2 * x, e2 / x);
        if (u - ONE).norm() < 1e-14 || (v - ONE).norm() < 1e-14 || x.norm() == 0.0 {
            return Err(Error::Singular {
                crossing: 0,
                what: "dilogarithm argument at 1".into(),
            });
        }
        let lx = x.ln();
        let (lu, lv) = ((ONE - u).ln(), (ONE - v).ln());
        let value = -2.0 * PI * I * a * lx - dilog(u) + dilog(v);
        let gx = -2.0 * PI * I * a + lu + lv;
        let ga = -2.0 * PI * I * lx + 2.0 * PI * I * (lu - lv);
        Ok(PotentialEval {
            value,
            grad_w: vec![gx],
            grad_a: vec![ga],
            p: 1,
        })
    }
    fn name(&self) -> String {
        "fig8-reduced".into()
    }
}

/// Single-variable potential of the Borromean rings with colors (a,b,c).
/// It carries an extra `pi i log x`, which puts its saddles at
/// `x = +-i` for `a = b = c = 1` and on the unit circle nearby.
#[derive(Clone, Copy, Debug, Default)]
pub struct BorromeanReduced;

impl Potential for BorromeanReduced {
    fn var_count(&self) -> usize {
        1
    }
    fn color_count(&self) -> usize {
        3
    }
    fn gauge(&self) -> Option<usize> {
        None
    }
    fn evaluate(&self, a: &[C64], w: &[C64]) -> Result<PotentialEval> {
        let x = w[0];
        if x.norm() == 0.0 || (x - ONE).norm() < 1e-14 || (x + ONE).norm() < 1e-14 {
            return Err(Error::Singular {
                crossing: 0,
                what: "reduced variable at 0 or +-1".into(),
            });
        }
        let lx = x.ln();
        let asum = a[0] + a[1] + a[2];
        let mut value = -2.0 * PI * I * asum * lx + 1.5 * lx * lx + PI * I * lx
            - 2.0 * dilog(x)
            + 2.0 * dilog(x * x);
        let mut gx = -2.0 * PI * I * asum + 3.0 * lx + PI * I + 2.0 * (ONE - x).ln()
            - 4.0 * (ONE - x * x).ln();
        let mut ga = vec![C64::new(0.0, 0.0); 3];
        for (k, &ak) in a.iter().enumerate().take(3) {
            let e2 = (2.0 * PI * I * ak).exp();
            let (u, v) = (e2 * x, e2 / x);
            if (u - ONE).norm() < 1e-14 || (v - ONE).norm() < 1e-14 {
                return Err(Error::Singular {
                    crossing: 0,
                    what: "dilogarithm argument at 1".into(),
                });
            }
            let (lu, lv) = ((ONE - u).ln(), (ONE - v).ln());
            value += -dilog(u) + dilog(v);
            gx += lu + lv;
            ga[k] = -2.0 * PI * I * lx + 2.0 * PI * I * (lu - lv);
        }
        Ok(PotentialEval {
            value,
            grad_w: vec![gx],
            grad_a: ga,
            p: 1,
        })
    }
    fn name(&self) -> String {
        "borromean-reduced".into()
    }
}
