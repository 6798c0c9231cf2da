use eac_core::instance::{Instance, SolverConfig, WDescriptor};
use eac_core::multiquad::parse_complex;
use eac_core::pipeline::solve;
use eac_core::segre::SegrePolynomial;
use eac_core::solver::{coarse_scan, harvest, newton, newton_refine, scan_cell, verify_solution, Cell, Seed, SolverSetup};
use eac_core::subspace::ComplexSubspace;
use eac_core::variety::{EllipticFactor, ProductVariety};
use eac_core::EacError;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::One;

type C = Complex<f64>;

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

fn line(a: &str, b: &str) -> ComplexSubspace {
    ComplexSubspace::new(2, vec![vec![parse_complex(a).unwrap(), parse_complex(b).unwrap()]]).unwrap()
}

fn wp_product() -> WDescriptor {
    let f = SegrePolynomial::linear(&[(4, C::new(1.0, 0.0)), (0, C::new(-1.0, 0.0))]);
    WDescriptor::hypersurface(f, Some((2, 2)))
}

fn setup_with(l: &ComplexSubspace, w: &WDescriptor, cfg: SolverConfig) -> SolverSetup {
    SolverSetup::new(&variety(), l, w, &cfg).unwrap()
}

fn setup() -> SolverSetup {
    setup_with(&line("1", "1"), &wp_product(), SolverConfig::default())
}

#[test]
fn scan_finds_a_small_seed_over_four_cells() {
    let s = setup();
    let seeds = coarse_scan(&s, 4, 200);
    assert!(seeds.first().is_some_and(|x| x.value < 0.1), "{:?}", seeds.first());
    assert!(seeds.windows(2).all(|w| w[0].value <= w[1].value));
}

#[test]
fn scan_of_a_function_without_zeros_is_empty() {
    let f = SegrePolynomial::linear(&[(0, C::new(2.0, 0.0))]);
    let s = setup_with(&line("1", "1"), &WDescriptor::hypersurface(f, Some((2, 2))), SolverConfig::default());
    assert!(coarse_scan(&s, 4, 32).is_empty());
}

#[test]
fn refining_the_grid_keeps_every_seed() {
    let s = setup();
    let cell = Cell { index: 0, p: 0, q: 0 };
    let coarse = scan_cell(&s, &cell, 24);
    let fine = scan_cell(&s, &cell, 48);
    // one coarse grid cell in t, measured along both cell edges
    let h = (C::new(1.0, 0.0).norm() + C::new(0.0, 2f64.sqrt()).norm()) / 24.0;
    for c in &coarse {
        let t = C::new(c.t[0], c.t[1]);
        let near = fine.iter().any(|f| (C::new(f.t[0], f.t[1]) - t).norm() <= 2.0 * h);
        assert!(near, "coarse seed {c:?} has no fine neighbour");
    }
}

#[test]
fn newton_keeps_an_exact_solution_and_fails_at_a_pole() {
    let s = setup();
    let report = harvest(&s, 1);
    let sol = &report.solutions[0];
    let t = C::new(sol.l[0][0], sol.l[0][1]);
    let (t2, res, iters) = newton(&s, t).unwrap();
    assert!(iters <= 1);
    assert!((t2 - t).norm() < 1e-12);
    assert!(res < 1e-10);
    let pole = Seed {
        t: [0.0, 0.0],
        value: 0.0,
        cell: 0,
    };
    let err = newton_refine(&s, &pole, &Cell { index: 0, p: 0, q: 0 }).unwrap_err();
    assert!(err.reason.contains("infinity"), "{}", err.reason);
}

#[test]
fn verification_rejects_perturbed_points_and_poles() {
    let s = setup();
    let report = harvest(&s, 1);
    let sol = report.solutions[0].clone();
    assert!(verify_solution(&s, &sol));
    let mut pseudo = sol.clone();
    pseudo.l[0][1] += 1e-3;
    assert!(!verify_solution(&s, &pseudo));
    let mut pole = sol;
    pole.l = vec![[0.0, 0.0]];
    assert!(!verify_solution(&s, &pole));
}

#[test]
fn harvested_solutions_are_sound_distinct_and_reproducible() {
    let s = setup();
    let a = variety();
    let r = harvest(&s, 25);
    assert_eq!(r.distinct_count, 25);
    for (i, x) in r.solutions.iter().enumerate() {
        assert!(x.residual < 1e-10);
        assert!(verify_solution(&s, x));
        for y in &r.solutions[i + 1..] {
            assert!(a.distance_in_a(&x.z_complex(), &y.z_complex()) > 1e-6);
        }
    }
    assert!(r.distinct_cells >= 5);
    assert!(r.solutions.iter().any(|x| x.jacobian_rank == 2));
    assert_eq!(harvest(&s, 25), r);
}

#[test]
fn irrational_slope_line_has_solutions() {
    let s = setup_with(&line("1", "sqrt(3)+1/2*i"), &wp_product(), SolverConfig::default());
    let r = harvest(&s, 3);
    assert_eq!(r.distinct_count, 3);
    assert_eq!(r.cells_skipped_as_periodic, 0);
}

#[test]
fn uncertified_instances_are_refused() {
    let inst = Instance::new("first factor", variety(), line("1", "0"), wp_product()).unwrap();
    assert!(matches!(solve(&inst, 1), Err(EacError::Precondition(_))));
}

#[test]
fn a_plane_is_cut_down_before_solving() {
    let l = ComplexSubspace::full(2);
    let inst = Instance::new("plane", variety(), l, wp_product()).unwrap();
    let out = solve(&inst, 2).unwrap();
    assert!(out.certify.reduced);
    assert_eq!(out.certify.l_used.len(), 1);
    assert_eq!(out.solve.distinct_count, 2);
}
