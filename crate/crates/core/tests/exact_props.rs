use eac_core::checker::check_seeded;
use eac_core::forms::ExteriorForm;
use eac_core::homology::{class_of_hypersurface, eac_certificate, form_of_equations};
use eac_core::hull::{complexification, rational_hull, rational_hull_real};
use eac_core::instance::WDescriptor;
use eac_core::linalg;
use eac_core::multiquad::{complex_to_f64, ComplexMQ};
use eac_core::segre::SegrePolynomial;
use eac_core::subspace::{ComplexSubspace, RealSubspace};
use eac_core::variety::{EllipticFactor, ProductVariety};
use eac_core::MultiQuad;
use nalgebra::DMatrix;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

const KEYS: [u64; 5] = [1, 2, 3, 5, 6];

fn mq(coeffs: &[i64]) -> MultiQuad {
    coeffs
        .iter()
        .zip(KEYS)
        .fold(MultiQuad::zero(), |acc, (&c, k)| acc + MultiQuad::term(BigRational::from_integer(c.into()), k))
}

fn arb_mq() -> impl Strategy<Value = MultiQuad> {
    prop::collection::vec(-4i64..=4, KEYS.len()).prop_map(|c| mq(&c))
}

fn arb_nonzero_mq() -> impl Strategy<Value = MultiQuad> {
    arb_mq().prop_filter("nonzero", |x| !x.is_zero())
}

fn arb_complex() -> impl Strategy<Value = ComplexMQ> {
    (arb_mq(), arb_mq()).prop_map(|(re, im)| Complex::new(re, im))
}

fn variety(d1: u64, d2: u64) -> ProductVariety {
    ProductVariety::new(
        vec![
            EllipticFactor::imaginary(BigRational::one(), d1).unwrap(),
            EllipticFactor::imaginary(BigRational::one(), d2).unwrap(),
        ],
        true,
    )
    .unwrap()
}

fn rational(n: i64) -> MultiQuad {
    MultiQuad::from_int(n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiquad_is_a_field(x in arb_mq(), y in arb_mq(), z in arb_nonzero_mq()) {
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&(&x + &y) * &z, &(&x * &z) + &(&y * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        let inv = z.inv().unwrap();
        prop_assert!((&z * &inv).is_one());
        prop_assert_eq!(x.checked_div(&z).unwrap() * z.clone(), x.clone());
    }

    #[test]
    fn squares_of_radicals_are_rational(a in -5i64..=5, b in -5i64..=5) {
        // (a√2 + b√5)² = 2a² + 5b² + 2ab√10
        let x = mq(&[0, a, 0, b, 0]);
        let sq = &x * &x;
        prop_assert_eq!(sq.coefficient(1), BigRational::from_integer((2 * a * a + 5 * b * b).into()));
        prop_assert_eq!(sq.coefficient(10), BigRational::from_integer((2 * a * b).into()));
    }
}

fn numeric_rank(m: &[Vec<MultiQuad>]) -> usize {
    let (r, c) = (m.len(), m[0].len());
    let dm = DMatrix::from_fn(r, c, |i, j| m[i][j].to_f64());
    let sv = dm.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > 1e-9 * top.max(1.0)).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn exact_rank_matches_numeric_rank(
        r in 1usize..=3,
        a in prop::collection::vec(arb_mq(), 12),
        b in prop::collection::vec(arb_mq(), 12),
    ) {
        // 4×4 product of a 4×r and an r×4 factor
        let left: Vec<Vec<MultiQuad>> = (0..4).map(|i| (0..r).map(|k| a[(i * 3 + k) % 12].clone()).collect()).collect();
        let right: Vec<Vec<MultiQuad>> = (0..r).map(|k| (0..4).map(|j| b[(k * 4 + j) % 12].clone()).collect()).collect();
        let m: Vec<Vec<MultiQuad>> = (0..4)
            .map(|i| (0..4).map(|j| (0..r).fold(MultiQuad::zero(), |acc, k| acc + &left[i][k] * &right[k][j])).collect())
            .collect();
        let dm = DMatrix::from_fn(4, 4, |i, j| m[i][j].to_f64());
        let sv = dm.singular_values();
        let (top, bottom) = (sv.max(), sv.iter().copied().filter(|&s| s > 1e-9 * sv.max().max(1.0)).fold(f64::INFINITY, f64::min));
        // skip numerically ill-conditioned draws
        prop_assume!(top == 0.0 || bottom / top > 1e-6);
        prop_assert_eq!(linalg::rank(&m), numeric_rank(&m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_coordinates_are_linear_and_integral_on_the_lattice(
        x in arb_complex(), y in arb_complex(), k in -3i64..=3, p in prop::collection::vec(-5i64..=5, 4),
    ) {
        let a = variety(2, 5);
        let kk = Complex::new(rational(k), MultiQuad::zero());
        let z1 = vec![x.clone(), y.clone()];
        let z2 = vec![y.clone(), x.clone()];
        let sum: Vec<ComplexMQ> = z1.iter().zip(&z2).map(|(u, v)| u.clone() + v.clone() * kk.clone()).collect();
        let c1 = a.to_lattice_coords_exact(&z1).unwrap();
        let c2 = a.to_lattice_coords_exact(&z2).unwrap();
        let cs = a.to_lattice_coords_exact(&sum).unwrap();
        for i in 0..4 {
            prop_assert_eq!(&cs[i], &(&c1[i] + &(&c2[i] * &rational(k))));
        }
        let ints: Vec<MultiQuad> = p.iter().map(|&n| rational(n)).collect();
        let lattice_point = a.from_lattice_coords_exact(&ints).unwrap();
        prop_assert_eq!(a.to_lattice_coords_exact(&lattice_point).unwrap(), ints);
    }

    #[test]
    fn hull_contains_is_rational_idempotent_and_monotone(v in prop::collection::vec(arb_complex(), 2), w in prop::collection::vec(arb_complex(), 2)) {
        prop_assume!(v.iter().any(|x| !x.re.is_zero() || !x.im.is_zero()));
        let a = variety(2, 5);
        let l1 = ComplexSubspace::span(2, std::slice::from_ref(&v));
        let l2 = ComplexSubspace::span(2, &[v, w]);
        let h1 = rational_hull(&l1, &a).unwrap();
        let h2 = rational_hull(&l2, &a).unwrap();
        let real1 = l1.realify(&a).unwrap();
        prop_assert!(h1.t.contains(&real1));
        prop_assert!(h1.t.is_rational());
        prop_assert_eq!(&rational_hull_real(&h1.t).t, &h1.t);
        prop_assert!(h2.t.contains(&h1.t));
        // minimality: every rational covector vanishing on L vanishes on T
        for eq in &h1.codim_equations {
            let covector: Vec<MultiQuad> = eq.iter().cloned().map(MultiQuad::from_rational).collect();
            for b in real1.basis() {
                prop_assert!(linalg::dot(&covector, b).is_zero());
            }
        }
        prop_assert_eq!(h1.codim_equations.len(), 4 - h1.dim_t);
        let c = complexification(&h1.t, &a).unwrap();
        prop_assert!(c.realify(&a).unwrap().contains(&h1.t));
        prop_assert_eq!(c.real_dim() % 2, 0);
    }
}

fn arb_form(n: usize, degree: usize) -> impl Strategy<Value = ExteriorForm<MultiQuad>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, n), degree).prop_map(move |rows| {
        let covs: Vec<Vec<MultiQuad>> = rows.iter().map(|r| r.iter().map(|&x| rational(x)).collect()).collect();
        ExteriorForm::wedge_covectors(n, &covs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_graded_commutative(
        (p, q, a, b) in (0usize..=3, 0usize..=3).prop_flat_map(|(p, q)| (Just(p), Just(q), arb_form(6, p), arb_form(6, q)))
    ) {
        let sign = if (p * q) % 2 == 0 { MultiQuad::one() } else { -MultiQuad::one() };
        prop_assert_eq!(a.wedge(&b), b.wedge(&a).scale(&sign));
    }

    #[test]
    fn recombined_equations_give_proportional_forms(v in prop::collection::vec(arb_complex(), 2), m in prop::collection::vec(-5i64..=5, 4)) {
        prop_assume!(v.iter().any(|x| !x.re.is_zero() || !x.im.is_zero()));
        let a = variety(2, 5);
        let l = ComplexSubspace::span(2, &[v]);
        let eqs = l.realify(&a).unwrap().equations();
        let k = eqs.len();
        prop_assume!(k == 2);
        let mix: Vec<Vec<MultiQuad>> = vec![vec![rational(m[0]), rational(m[1])], vec![rational(m[2]), rational(m[3])]];
        prop_assume!(linalg::rank(&mix) == 2);
        let mixed: Vec<Vec<MultiQuad>> = mix
            .iter()
            .map(|r| (0..4).map(|c| &(&r[0] * &eqs[0][c]) + &(&r[1] * &eqs[1][c])).collect())
            .collect();
        let det = &(&mix[0][0] * &mix[1][1]) - &(&mix[0][1] * &mix[1][0]);
        let canonical = form_of_equations(4, &eqs);
        prop_assert_eq!(form_of_equations(4, &mixed), canonical.scale(&det));
    }

    #[test]
    fn certificate_ignores_the_basis_of_l_and_matches_the_closed_form(
        s in arb_complex(), scale in arb_complex(), m in 2u64..=3, n in 2u64..=3,
    ) {
        prop_assume!(!s.re.is_zero() || !s.im.is_zero());
        prop_assume!(!scale.re.is_zero() || !scale.im.is_zero());
        let a = variety(2, 5);
        let one = Complex::new(MultiQuad::one(), MultiQuad::zero());
        let l = ComplexSubspace::new(2, vec![vec![one.clone(), s.clone()]]).unwrap();
        let l_scaled = ComplexSubspace::new(2, vec![vec![scale.clone(), s.clone() * scale.clone()]]).unwrap();
        let eta = class_of_hypersurface(m, n).unwrap().poincare_dual::<MultiQuad>();
        let c = eac_certificate(&eta, &l, &a).unwrap();
        let c2 = eac_certificate(&eta, &l_scaled, &a).unwrap();
        prop_assert_eq!(&c.value, &c2.value);
        prop_assert!(!c.value.is_zero());
        prop_assert_eq!(&c.value, &(&c.ratio * &c.cross_check));
        // L = {z₁ − z₂/s = 0}
        let sf = complex_to_f64(&s);
        let closed = m as f64 * (1.0 / sf).norm_sqr() * 5f64.sqrt() + n as f64 * 2f64.sqrt();
        prop_assert!((c.cross_check.to_f64() - closed).abs() < 1e-12 * closed.max(1.0));
    }

    #[test]
    fn verdict_does_not_depend_on_the_basis(
        u in prop::collection::vec(arb_complex(), 2), w in prop::collection::vec(arb_complex(), 2), k in 1i64..=3,
    ) {
        let a = variety(2, 5);
        let f = SegrePolynomial::linear(&[(4, Complex::new(1.0, 0.0)), (0, Complex::new(-1.0, 0.0))]);
        let desc = WDescriptor::hypersurface(f, Some((2, 2)));
        let l = ComplexSubspace::span(2, &[u.clone(), w.clone()]);
        let kk = Complex::new(rational(k), MultiQuad::zero());
        let mixed: Vec<ComplexMQ> = u.iter().zip(&w).map(|(x, y)| x.clone() + y.clone() * kk.clone()).collect();
        let l2 = ComplexSubspace::span(2, &[mixed, w]);
        prop_assume!(l.dim() == l2.dim());
        let v1 = check_seeded(&l, &desc, &a, 0).unwrap();
        let v2 = check_seeded(&l2, &desc, &a, 0).unwrap();
        prop_assert_eq!(v1.free.status, v2.free.status);
        prop_assert_eq!(v1.rotund.status, v2.rotund.status);
    }
}

#[test]
fn real_subspace_from_equations_round_trips() {
    let eqs = vec![vec![rational(1), rational(0), rational(-1), rational(0)]];
    let t = RealSubspace::from_equations(4, &eqs);
    assert_eq!(t.dim(), 3);
    assert_eq!(t.equations(), eqs);
}
