use proptest::collection::vec;
use proptest::prelude::*;
use tricontract::seqspace::{convolve, weight, weight_iv, AlphaBound, SeqVector};
use tricontract::Interval;

fn points(v: &[f64]) -> Vec<Interval> {
    v.iter().map(|&x| Interval::point(x)).collect()
}

fn overlap(a: Interval, b: Interval) -> bool {
    a.lo() <= b.hi() && b.lo() <= a.hi()
}

// Direct evaluation over the full symmetric index range.
fn brute(x: &[f64], y: &[f64], k: i64) -> f64 {
    let nx = x.len() as i64;
    let ny = y.len() as i64;
    let mut acc = 0.0;
    for k1 in -nx + 1..nx {
        let k2 = k - k1;
        if k2.abs() < ny {
            acc += x[k1.unsigned_abs() as usize] * y[k2.unsigned_abs() as usize];
        }
    }
    acc
}

// Sequences with ‖x‖_2 <= 1.
fn decaying(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(-1f64..1.0, 1..=n).prop_map(|v| {
        v.iter()
            .enumerate()
            .map(|(k, x)| x / weight(k, 2.0))
            .collect()
    })
}

proptest! {
    #[test]
    fn convolution_is_commutative(x in vec(-10f64..10.0, 1..12), y in vec(-10f64..10.0, 1..12)) {
        let a = convolve(&points(&x), &points(&y));
        let b = convolve(&points(&y), &points(&x));
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            prop_assert!(overlap(*p, *q));
        }
    }

    #[test]
    fn convolution_is_bilinear(
        x in vec(-10f64..10.0, 8),
        y in vec(-10f64..10.0, 8),
        z in vec(-10f64..10.0, 5),
        c in -4f64..4.0,
    ) {
        let (xi, yi, zi) = (points(&x), points(&y), points(&z));
        let ci = Interval::point(c);
        let lhs_in: Vec<Interval> = xi.iter().zip(&yi).map(|(&a, &b)| ci * a + b).collect();
        let lhs = convolve(&lhs_in, &zi);
        let xz = convolve(&xi, &zi);
        let yz = convolve(&yi, &zi);
        for k in 0..lhs.len() {
            prop_assert!(overlap(lhs[k], ci * xz[k] + yz[k]));
        }
    }

    #[test]
    fn convolution_matches_direct_sum(x in vec(-10f64..10.0, 1..10), y in vec(-10f64..10.0, 1..10)) {
        let fast = convolve(&x, &y);
        let enclosed = convolve(&points(&x), &points(&y));
        for (k, v) in fast.iter().enumerate() {
            let d = brute(&x, &y, k as i64);
            let scale: f64 = x.iter().map(|a| a.abs()).sum::<f64>() * y.iter().map(|a| a.abs()).sum::<f64>();
            prop_assert!((v - d).abs() <= 4.0 * f64::EPSILON * scale.max(1.0));
            prop_assert!(enclosed[k].contains(d) || (enclosed[k].mid() - d).abs() <= 4.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn convolution_estimate_dominates(x in decaying(12), y in decaying(12), l in 1usize..200) {
        let alpha = AlphaBound::new(2.0, 6, l).unwrap();
        let xs = SeqVector::new(points(&x), 2.0);
        let ys = SeqVector::new(points(&y), 2.0);
        let nx = xs.norm_s();
        let ny = ys.norm_s();
        let conv = xs.convolve(&ys);
        for k in 0..conv.len() {
            let bound = alpha.get(k) * nx * ny / weight_iv(k, 2.0);
            prop_assert!(conv.coeffs[k].mag() <= bound.lo());
        }
    }

    #[test]
    fn alpha_is_non_increasing_in_l(l1 in 1usize..300, extra in 0usize..300, k in 0usize..20) {
        let a = AlphaBound::new(2.0, 6, l1).unwrap();
        let b = AlphaBound::new(2.0, 6, l1 + extra).unwrap();
        prop_assert!(b.get(k).lo() <= a.get(k).hi());
    }
}

#[test]
fn alpha_rejects_unsupported_regimes() {
    assert!(AlphaBound::new(1.5, 6, 10).is_err());
    assert!(AlphaBound::new(2.0, 5, 10).is_err());
    assert!(AlphaBound::new(2.0, 6, 0).is_err());
}
