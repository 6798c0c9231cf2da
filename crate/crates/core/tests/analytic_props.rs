use eac_core::delta::{delta_map, jacobian_probe};
use eac_core::instance::WDescriptor;
use eac_core::segre::{count_roots_on_fiber, ExpMap, SegrePolynomial};
use eac_core::variety::{EllipticFactor, ProductVariety};
use eac_core::weierstrass::{invariants, Backend, CurvePoint, WpEvaluator};
use eac_core::{EacError, Wp};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

type C = Complex<f64>;

fn arb_tau() -> impl Strategy<Value = C> {
    (-0.5f64..0.5, 0.9f64..2.5).prop_map(|(x, y)| C::new(x, y))
}

fn arb_point() -> impl Strategy<Value = (f64, f64)> {
    (0.02f64..0.98, 0.02f64..0.98)
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn variety() -> ProductVariety {
    ProductVariety::new(
        vec![
            EllipticFactor::imaginary(BigRational::one(), 2).unwrap(),
            EllipticFactor::imaginary(BigRational::one(), 5).unwrap(),
        ],
        true,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn wp_is_even_periodic_and_solves_its_ode(tau in arb_tau(), (x, y) in arb_point(), shift in (-3i32..=3, -3i32..=3)) {
        let ev = Wp::new(tau, Backend::Theta).unwrap();
        let z = C::new(x, 0.0) + tau * y;
        let (p, dp) = (ev.wp(z).unwrap(), ev.wp_prime(z).unwrap());
        prop_assert!(rel(ev.wp(-z).unwrap(), p) < 1e-10);
        prop_assert!(rel(-ev.wp_prime(-z).unwrap(), dp) < 1e-10);
        let w = z + C::new(shift.0 as f64, 0.0) + tau * shift.1 as f64;
        prop_assert!(rel(ev.wp(w).unwrap(), p) < 1e-10);
        prop_assert!(rel(ev.wp_prime(w).unwrap(), dp) < 1e-10);
        prop_assert!(ev.ode_residual(z).unwrap() < 1e-10);
    }

    #[test]
    fn lattice_points_are_at_infinity(tau in arb_tau(), m in -3i32..=3, n in -3i32..=3) {
        let ev = Wp::new(tau, Backend::LatticeSum).unwrap();
        let z = C::new(m as f64, 0.0) + tau * n as f64;
        prop_assert_eq!(ev.eval(z), CurvePoint::AtInfinity);
        prop_assert!(matches!(ev.wp(z), Err(EacError::AtInfinity)));
    }
}

#[test]
fn backends_agree_on_a_grid() {
    for tau in [C::new(0.0, 1.0), C::new(0.0, 2f64.sqrt()), C::new(0.0, 5f64.sqrt()), C::new(0.5, 0.866_025_403_784_438_6), C::new(0.31, 1.7)] {
        let a = Wp::new(tau, Backend::Theta).unwrap();
        let b = Wp::new(tau, Backend::LatticeSum).unwrap();
        for i in 0..10 {
            for k in 0..5 {
                let z = C::new((i as f64 + 0.5) / 10.0, 0.0) + tau * ((k as f64 + 0.5) / 5.0);
                assert!(rel(a.wp(z).unwrap(), b.wp(z).unwrap()) < 1e-9, "tau {tau}, z {z}");
                assert!(rel(a.wp_prime(z).unwrap(), b.wp_prime(z).unwrap()) < 1e-9, "tau {tau}, z {z}");
            }
        }
    }
}

/// Truncated Eisenstein sums `g₂ = 60 Σ' ω⁻⁴`, `g₃ = 140 Σ' ω⁻⁶` over a
/// `(2N+1)²` box, summed symmetrically.
fn box_invariants(tau: C, n: i64) -> (C, C) {
    let (mut s4, mut s6) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    for a in -n..=n {
        for b in -n..=n {
            if a == 0 && b == 0 {
                continue;
            }
            let w = C::new(a as f64, 0.0) + tau * b as f64;
            let w2 = w * w;
            let w4 = w2 * w2;
            s4 += 1.0 / w4;
            s6 += 1.0 / (w4 * w2);
        }
    }
    (60.0 * s4, 140.0 * s6)
}

/// Box sums have an `O(N⁻²)` tail; one Richardson step removes it.
fn brute_invariants(tau: C, n: i64) -> (C, C) {
    let (a2, a3) = box_invariants(tau, n);
    let (b2, b3) = box_invariants(tau, 2 * n);
    ((4.0 * b2 - a2) / 3.0, (4.0 * b3 - a3) / 3.0)
}

#[test]
fn invariants_match_direct_lattice_sums() {
    let tau = C::new(0.0, 2f64.sqrt());
    let (g2, g3) = invariants(tau).unwrap();
    let (b2, b3) = brute_invariants(tau, 300);
    assert!(rel(g2, b2) < 1e-8, "{g2} vs {b2}");
    assert!(rel(g3, b3) < 1e-8, "{g3} vs {b3}");
    let (_, g3_square) = invariants(C::new(0.0, 1.0)).unwrap();
    assert!(g3_square.norm() < 1e-10);
    let (g2_hex, _) = invariants(C::from_polar(1.0, std::f64::consts::PI / 3.0)).unwrap();
    assert!(g2_hex.norm() < 1e-10);
}

#[test]
fn single_precision_evaluator_is_consistent() {
    let ev = WpEvaluator::<f32>::new(Complex::new(0.0, 1.4), Backend::Theta).unwrap();
    let z = Complex::new(0.3f32, 0.4);
    let r = ev.ode_residual(z).unwrap();
    assert!(r < 1e-3, "{r}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fibre_counts_are_jitter_invariant(seed_a in 0u64..1000, seed_b in 1000u64..2000, (x, y) in arb_point(), c in (-2.0f64..2.0, -2.0f64..2.0)) {
        let a = variety();
        let exp = ExpMap::new(&a, Backend::Theta).unwrap();
        let fixed = C::new(x, 0.0) + C::new(0.0, 5f64.sqrt()) * y;
        let c = C::new(c.0, c.1);
        for (k, expect) in [(3usize, 2u32), (6, 3)] {
            let f = SegrePolynomial::linear(&[(k, C::new(1.0, 0.0)), (0, -c)]);
            let na = count_roots_on_fiber(&f, 0, fixed, &exp, seed_a).unwrap();
            let nb = count_roots_on_fiber(&f, 0, fixed, &exp, seed_b).unwrap();
            prop_assert_eq!(na, nb);
            prop_assert_eq!(na, expect);
        }
    }

    #[test]
    fn delta_is_a_group_shift(l in (-2.0f64..2.0, -2.0f64..2.0), l2 in (-2.0f64..2.0, -2.0f64..2.0), w in (arb_point(), arb_point())) {
        let a = variety();
        let basis = vec![vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]];
        let w: Vec<C> = vec![C::new(w.0 .0, 2f64.sqrt() * w.0 .1), C::new(w.1 .0, 5f64.sqrt() * w.1 .1)];
        let (l, l2) = (C::new(l.0, l.1), C::new(l2.0, l2.1));
        let d0 = delta_map(&basis, &[C::new(0.0, 0.0)], &w, &a);
        prop_assert!(a.distance_in_a(&d0, &w) < 1e-12);
        let d1 = delta_map(&basis, &[l], &w, &a);
        let d2 = delta_map(&basis, &[l2], &w, &a);
        let shift: Vec<C> = d1.iter().zip(&basis[0]).map(|(d, v)| d - (l2 - l) * v).collect();
        prop_assert!(a.distance_in_a(&shift, &d2) < 1e-10);
    }
}

#[test]
fn jacobian_probe_rejects_points_off_w() {
    let a = variety();
    let exp = ExpMap::new(&a, Backend::Theta).unwrap();
    let f = SegrePolynomial::linear(&[(4, C::new(1.0, 0.0)), (0, C::new(-1.0, 0.0))]);
    let w = WDescriptor::hypersurface(f, Some((2, 2)));
    let basis = vec![vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]];
    let z = vec![C::new(0.3, 0.2), C::new(0.1, 0.7)];
    assert!(matches!(
        jacobian_probe(&basis, &[C::new(0.0, 0.0)], &z, &w, &exp),
        Err(EacError::OffVariety(_))
    ));
}
