use proptest::collection::vec;
use proptest::prelude::*;
use tricontract::problem::example4_tridiag;
use tricontract::tridiag::{phi1, phi2, phi3, tail_factors, TailFactors};
use tricontract::{Error, Interval};

fn factors(m: usize, l: usize) -> TailFactors {
    tail_factors(&example4_tridiag(m).unwrap(), m, l).unwrap()
}

#[test]
fn pivot_ratio_stays_in_gamma_one() {
    for m in [6, 10, 20, 40] {
        let f = factors(m, 200);
        for n in 1..=200 {
            let u = f.u(n);
            assert!(u.hi() >= f.gamma.lo(), "m={m} n={n} u={u}");
            assert!(u.lo() <= 1.0, "m={m} n={n} u={u}");
            assert!(u.lo() >= f.gamma.lo() * (1.0 - 1e-12), "m={m} n={n} u={u}");
            assert!(u.hi() <= 1.0 + 1e-12, "m={m} n={n} u={u}");
        }
    }
}

#[test]
fn tail_factors_validates_its_inputs() {
    let c = example4_tridiag(20).unwrap();
    assert!(matches!(tail_factors(&c, 20, 0), Err(Error::Parameter(_))));
    assert!(matches!(tail_factors(&c, 5, 100), Err(Error::Parameter(_))));
    assert!(matches!(tail_factors(&c, 20, 19), Err(Error::Parameter(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn w_tilde_is_cauchy(m in 6usize..40, extra in 0usize..200, more in 1usize..200) {
        let l1 = m + extra;
        let a = factors(m, l1);
        let b = factors(m, l1 + more);
        let gap = (b.w_tilde - a.w_tilde).mig();
        prop_assert!(gap <= a.w_tilde_err.hi(), "gap {} err {}", gap, a.w_tilde_err);
    }

    #[test]
    fn tail_bound_is_homogeneous(y in vec(-1e3f64..1e3, 1..30), c in 1e-3f64..1e3, k in 0usize..60) {
        let f = factors(20, 100);
        let yi: Vec<Interval> = y.iter().map(|&v| Interval::point(v)).collect();
        let scaled: Vec<Interval> = y.iter().map(|&v| Interval::point(v) * Interval::point(c)).collect();
        let base = f.bound_x_from_y(&yi, k, None).unwrap();
        let big = f.bound_x_from_y(&scaled, k, None).unwrap();
        let want = base * Interval::point(c);
        let tol = 1e-12 * want.hi().max(f64::MIN_POSITIVE);
        prop_assert!((big.hi() - want.hi()).abs() <= tol);
        let u1 = f.bound_uniform(20, 2.0, Interval::ONE, k).unwrap();
        let uc = f.bound_uniform(20, 2.0, Interval::point(c), k).unwrap();
        prop_assert!((uc.hi() - c * u1.hi()).abs() <= 1e-12 * uc.hi());
    }

    #[test]
    fn phi_functions_decrease_past_m(t in 0f64..1.0, dt in 0.01f64..1.0) {
        let f = factors(20, 100);
        let chk = f.check_m(20, 2.0).unwrap();
        prop_assume!(chk.ok_a);
        let lo = 20.0;
        let x1 = lo + t * 9.0 * lo;
        let x2 = (x1 + dt * lo).min(10.0 * lo);
        prop_assume!(x2 > x1);
        let p = 2.0 + f.constants.s_l;
        prop_assert!(phi1(f.theta, 20, p, x2).unwrap().lo() <= phi1(f.theta, 20, p, x1).unwrap().hi());
        prop_assert!(phi2(f.theta, x2).unwrap().lo() <= phi2(f.theta, x1).unwrap().hi());
        prop_assert!(phi3(20, x2).unwrap().lo() <= phi3(20, x1).unwrap().hi());
    }
}
