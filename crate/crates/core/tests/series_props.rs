use num_complex::Complex64;
use proptest::prelude::*;
use schlicht::{NormalizedFunction, TruncatedSeries};

fn coeff() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn series(max_order: usize) -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(coeff(), 1..=max_order + 1).prop_map(|c| TruncatedSeries::new(c).unwrap())
}

fn series_of(order: usize) -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(coeff(), order + 1).prop_map(|c| TruncatedSeries::new(c).unwrap())
}

fn normalized(order: usize) -> impl Strategy<Value = NormalizedFunction> {
    prop::collection::vec(coeff(), order - 1).prop_map(|t| NormalizedFunction::from_tail(&t).unwrap())
}

fn close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) -> bool {
    a.order() == b.order()
        && a.coeffs()
            .iter()
            .zip(b.coeffs())
            .all(|(x, y)| (x - y).norm() <= tol * (1.0 + y.norm()))
}

proptest! {
    #[test]
    fn reversion_round_trips(f in normalized(6)) {
        let g = f.revert();
        let id = TruncatedSeries::identity(6);
        let fg = f.series().compose(&g).unwrap();
        let gf = g.compose(f.series()).unwrap();
        // Inverse coefficients can reach ~8^n, so compare relative to them.
        let scale = g.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
        prop_assert!(close(&fg, &id, 1e-12 * scale), "{fg:?}");
        prop_assert!(close(&gf, &id, 1e-12 * scale), "{gf:?}");
    }

    #[test]
    fn reversion_is_an_involution(f in normalized(5)) {
        let g = NormalizedFunction::new(f.revert()).unwrap();
        let back = g.revert();
        let scale = g.series().coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max).powi(2);
        prop_assert!(close(&back, f.series(), 1e-11 * scale));
    }

    #[test]
    fn hadamard_laws(a in series_of(6), b in series_of(6), c in series_of(6)) {
        prop_assert_eq!(a.hadamard(&b), b.hadamard(&a));
        prop_assert!(close(&a.hadamard(&b).hadamard(&c), &a.hadamard(&b.hadamard(&c)), 1e-14));
        let unit = TruncatedSeries::new(vec![Complex64::new(1.0, 0.0); 7]).unwrap();
        prop_assert_eq!(a.hadamard(&unit), a.clone());
        prop_assert!(close(&a.hadamard(&b.add(&c)), &a.hadamard(&b).add(&a.hadamard(&c)), 1e-14));
    }

    #[test]
    fn hadamard_truncates_to_min_order(a in series(8), b in series(8)) {
        prop_assert_eq!(a.hadamard(&b).order(), a.order().min(b.order()));
    }

    #[test]
    fn division_inverts_multiplication(a in series_of(7), b in series_of(7), lead in 0.5..2.0f64) {
        let mut d = b.coeffs().to_vec();
        d[0] = Complex64::new(lead, 0.0);
        let d = TruncatedSeries::new(d).unwrap();
        let q = a.mul(&d).checked_div(&d).unwrap();
        prop_assert!(close(&q, &a, 1e-9));
        let back = a.checked_div(&d).unwrap().mul(&d);
        prop_assert!(close(&back, &a, 1e-9));
    }

    #[test]
    fn division_cancels_common_power_of_z(a in series_of(6), b in series_of(6)) {
        let mut den = b.coeffs().to_vec();
        den[0] = Complex64::new(1.0, 0.0);
        let den = TruncatedSeries::new(den).unwrap().shift_up();
        let num = a.shift_up();
        let q = num.checked_div(&den).unwrap();
        prop_assert_eq!(q.order(), 6);
    }

    #[test]
    fn product_rule(a in series_of(6), b in series_of(6)) {
        let lhs = a.mul(&b).derivative();
        let rhs = a.derivative().mul(&b).add(&a.mul(&b.derivative()));
        prop_assert!(close(&lhs, &rhs.truncate(lhs.order()), 1e-12));
    }

    #[test]
    fn multiplication_commutes_and_distributes(a in series_of(5), b in series_of(5), c in series_of(5)) {
        prop_assert!(close(&a.mul(&b), &b.mul(&a), 1e-14));
        prop_assert!(close(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c)), 1e-13));
    }

    #[test]
    fn eval_is_consistent_with_arithmetic(a in series_of(5), b in series_of(5), r in 0.0..0.9f64, t in 0.0..6.3f64) {
        let z = Complex64::from_polar(r, t);
        let sum = a.add(&b).eval(z);
        prop_assert!((sum - a.eval(z) - b.eval(z)).norm() < 1e-12);
        prop_assert!((a.dilate(0.5).eval(z) - a.eval(z * 0.5)).norm() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_exact(a in series(10)) {
        let text = serde_json::to_string(&a).unwrap();
        let back: TruncatedSeries = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn add_zero_pads(a in series(6), b in series(6)) {
        let s = a.add(&b);
        prop_assert_eq!(s.order(), a.order().max(b.order()));
        let back = s.sub(&b).truncate(a.order());
        prop_assert!(close(&back, &a, 1e-15));
    }
}

#[test]
fn koebe_inverse_coefficients() {
    let k = schlicht::kernels::koebe(4);
    let g = k.revert();
    let want = [0.0, 1.0, -2.0, 5.0, -14.0];
    for (got, want) in g.coeffs().iter().zip(want) {
        assert!((got - Complex64::new(want, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn composition_requires_vanishing_inner() {
    let a = TruncatedSeries::from_real(&[1.0, 1.0]).unwrap();
    let inner = TruncatedSeries::from_real(&[0.5, 1.0]).unwrap();
    assert!(a.compose(&inner).is_err());
}

#[test]
fn rejects_malformed_input() {
    assert!(TruncatedSeries::new(vec![]).is_err());
    assert!(TruncatedSeries::from_real(&[1.0, f64::NAN]).is_err());
    assert!(serde_json::from_str::<TruncatedSeries>(r#"{"order":2,"re":[1,2],"im":[0,0]}"#).is_err());
    assert!(NormalizedFunction::new(TruncatedSeries::from_real(&[0.0, 2.0]).unwrap()).is_err());
}
