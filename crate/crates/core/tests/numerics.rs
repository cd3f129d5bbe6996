use std::f64::consts::{FRAC_PI_2, PI};

use mmofdm::numerics::{bessel_j0, integrate, sinc, sine_integral, QuadratureSpec};
use proptest::prelude::*;

#[test]
fn known_values() {
    assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    assert!((bessel_j0(2.404825557695773).unwrap()).abs() < 1e-12);
    assert!((sine_integral(PI).unwrap() - 1.851937051982466).abs() < 1e-12);
    assert!((sine_integral(1e6).unwrap() - FRAC_PI_2).abs() < 1e-5);
    assert_eq!(sinc(0.0).unwrap(), 1.0);
    assert!(sine_integral(-1.0).is_err());
    assert!(bessel_j0(f64::NAN).is_err());
}

proptest! {
    #[test]
    fn j0_is_even_and_bounded(x in -200.0f64..200.0) {
        let a = bessel_j0(x).unwrap();
        prop_assert_eq!(a, bessel_j0(-x).unwrap());
        prop_assert!(a.abs() <= 1.0);
    }

    #[test]
    fn si_rises_to_pi(a in 0.0..PI, d in 0.0..PI) {
        let b = (a + d).min(PI);
        prop_assert!(sine_integral(a).unwrap() <= sine_integral(b).unwrap() + 1e-15);
    }

    #[test]
    fn si_peaks_at_pi(z in 0.0f64..500.0) {
        prop_assert!(sine_integral(z).unwrap() <= sine_integral(PI).unwrap() + 1e-15);
    }

    #[test]
    fn sinc_is_even_and_bounded(x in -50.0f64..50.0) {
        let s = sinc(x).unwrap();
        prop_assert!(s.abs() <= 1.0);
        prop_assert!((s - sinc(-x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn integration_is_linear(p in -3.0f64..3.0, q in -3.0f64..3.0, a in -2.0f64..0.0, b in 0.0f64..2.0) {
        let spec = QuadratureSpec::default();
        let f = |x: f64| x.exp();
        let g = |x: f64| (3.0 * x).cos();
        let lhs = integrate(|x| p * f(x) + q * g(x), a, b, &spec).unwrap();
        let rhs = p * integrate(f, a, b, &spec).unwrap() + q * integrate(g, a, b, &spec).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()));
        let exact = p * (b.exp() - a.exp()) + q * ((3.0 * b).sin() - (3.0 * a).sin()) / 3.0;
        prop_assert!((lhs - exact).abs() < 1e-8 * (1.0 + exact.abs()));
    }

    #[test]
    fn integration_is_additive(a in -2.0f64..0.0, m in 0.0f64..1.0, b in 1.0f64..2.0) {
        let spec = QuadratureSpec::default();
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let whole = integrate(f, a, b, &spec).unwrap();
        let split = integrate(f, a, m, &spec).unwrap() + integrate(f, m, b, &spec).unwrap();
        prop_assert!((whole - split).abs() < 1e-10);
        prop_assert!((whole - (b.atan() - a.atan())).abs() < 1e-10);
        prop_assert!(integrate(f, b, a, &spec).is_err());
    }
}
