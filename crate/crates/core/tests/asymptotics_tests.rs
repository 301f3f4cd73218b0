use knotvol::asymptotics::{color_sequence, extrapolate, growth_rate, tv_growth, CrossingPattern, Evaluator};
use knotvol::diagram::braids;
use knotvol::jones::TvLink;
use knotvol::Error;
use proptest::prelude::*;

const FIG8_VOL: f64 = 2.029883212819307;
const BORROMEAN_VOL: f64 = 7.327724753417752;

fn pattern(k: usize) -> CrossingPattern {
    let b = match k % 4 {
        0 => braids::figure_eight(),
        1 => braids::borromean(),
        2 => braids::whitehead(),
        _ => braids::hopf(),
    };
    CrossingPattern::of_braid(&b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn colors_are_odd_close_and_parity_consistent(k in 0usize..4, n in 3usize..3000,
                                                  a in prop::collection::vec(prop_oneof![Just(1.0f64), 0.001..=1.0f64], 3)) {
        let pat = pattern(k);
        let a = &a[..pat.components];
        let c = color_sequence(a, n, &pat).unwrap();
        let m: Vec<usize> = c.iter().map(|x| (x - 1) / 2).collect();
        for (ci, ai) in c.iter().zip(a) {
            prop_assert!(ci % 2 == 1);
            prop_assert!(*ci <= n);
            prop_assert!((*ci as f64 / n as f64 - ai).abs() <= 3.0 / n as f64 + 1e-12);
        }
        for (i, &s) in pat.self_crossing.iter().enumerate() {
            if s {
                prop_assert!(m[i] % 2 == 0);
            }
        }
        for &(x, y) in &pat.mixed {
            prop_assert!((m[x] + m[y]) % 2 == 0);
        }
    }
}

#[test]
fn crossing_patterns() {
    let f8 = CrossingPattern::of_braid(&braids::figure_eight());
    assert_eq!(f8.components, 1);
    assert_eq!(f8.self_crossing, vec![true]);
    let bor = CrossingPattern::of_braid(&braids::borromean());
    assert_eq!(bor.components, 3);
    assert_eq!(bor.mixed.len(), 3);
    let wh = CrossingPattern::of_braid(&braids::whitehead());
    assert_eq!(wh.components, 2);
    assert_eq!(wh.mixed, vec![(0, 1)]);
}

#[test]
fn color_errors() {
    let pat = pattern(0);
    assert!(color_sequence(&[1.0], 2, &pat).is_err());
    assert!(color_sequence(&[0.0], 11, &pat).is_err());
    assert!(color_sequence(&[1.5], 11, &pat).is_err());
    assert!(color_sequence(&[1.0, 1.0], 11, &pat).is_err());
}

fn fig8_list() -> Vec<u64> {
    (1..=20).map(|k| 100 * k + 1).collect()
}

#[test]
fn dropping_the_largest_n_stays_within_three_errors() {
    let full = growth_rate(&Evaluator::Fig8, &[1.0], 1, &fig8_list()).unwrap();
    let c0 = full.extrapolated.unwrap();
    let se = full.stderr.unwrap();
    let ns: Vec<f64> = full.entries.iter().map(|e| e.n as f64).collect();
    let vs: Vec<f64> = full.entries.iter().map(|e| e.value).collect();
    let k = ns.len() - 1;
    let (c1, _) = extrapolate(&ns[..k], &vs[..k]).unwrap();
    assert!((c1 - c0).abs() < 3.0 * se, "{c0} {c1} {se}");
    assert!((c0 - FIG8_VOL).abs() < 0.02);
}

#[test]
fn fig8_values_in_n() {
    // observed, not required: report the monotonicity of the raw values
    let s = growth_rate(&Evaluator::Fig8, &[1.0], 1, &fig8_list()).unwrap();
    let vs: Vec<f64> = s.entries.iter().map(|e| e.value).collect();
    assert!(vs.iter().all(|v| v.is_finite() && *v > FIG8_VOL));
    let increasing = vs.windows(2).rev().take(5).all(|w| w[1] > w[0]);
    eprintln!("fig8 sweep tail increasing in N: {increasing} ({:.6} .. {:.6})", vs[0], vs[vs.len() - 1]);
}

#[test]
fn borromean_sweep() {
    let list: Vec<u64> = (1..=8).map(|k| 100 * k + 1).collect();
    let s = growth_rate(&Evaluator::Borromean, &[1.0; 3], 1, &list).unwrap();
    assert!(s.truncated.is_empty());
    assert_eq!(s.entries.len(), list.len());
    assert!((s.extrapolated.unwrap() - BORROMEAN_VOL).abs() < 0.1);
}

#[test]
fn sweep_list_errors() {
    assert!(matches!(
        growth_rate(&Evaluator::Fig8, &[1.0], 1, &[101, 201, 201, 301]),
        Err(Error::Invalid(_))
    ));
    assert!(matches!(growth_rate(&Evaluator::Fig8, &[1.0], 1, &[101, 201, 301]), Err(Error::Invalid(_))));
    assert!(tv_growth(TvLink::Fig8, &[11, 7]).is_err());
}

#[test]
fn capped_state_sums_truncate() {
    let ev = Evaluator::Braid {
        braid: braids::figure_eight(),
        cap: 400,
    };
    let list = [5, 7, 9, 11, 13, 15, 17];
    let s = growth_rate(&ev, &[0.5], 1, &list).unwrap();
    assert!(!s.truncated.is_empty());
    assert_eq!(s.entries.len() + s.truncated.len(), list.len());
    for e in &s.entries {
        assert!(e.colors[0].pow(3) <= 400);
    }
    let tiny = Evaluator::Braid {
        braid: braids::figure_eight(),
        cap: 10,
    };
    assert!(growth_rate(&tiny, &[0.5], 1, &list).is_err());
}

#[test]
fn borromean_turaev_viro_trend() {
    let s = tv_growth(TvLink::Borromean, &[5, 11, 21, 51, 101]).unwrap();
    let vs: Vec<f64> = s.entries.iter().map(|e| e.value).collect();
    eprintln!("borromean TV growth: {vs:?}");
    let gap = |v: f64| (v - BORROMEAN_VOL).abs();
    assert!(gap(vs[4]) < gap(vs[0]));
    assert!(gap(vs[4]) < 0.05 * BORROMEAN_VOL);
    assert!(s.extrapolated.is_some());
}

#[test]
fn fig8_turaev_viro_gap_shrinks() {
    let s = tv_growth(TvLink::Fig8, &[51, 101, 201]).unwrap();
    let gaps: Vec<f64> = s.entries.iter().map(|e| (e.value - FIG8_VOL).abs()).collect();
    assert!(gaps[2] < gaps[1] && gaps[1] < gaps[0], "{gaps:?}");
}
