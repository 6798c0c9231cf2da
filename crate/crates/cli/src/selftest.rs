//! Built-in property suite run by `eac selftest`.

use std::f64::consts::PI;

use eac_core::forms::ExteriorForm;
use eac_core::homology::{class_of_hypersurface, eac_certificate, form_of_equations};
use eac_core::hull::{hull_chain, rational_hull};
use eac_core::linalg;
use eac_core::multiquad::parse_complex;
use eac_core::segre::{count_roots_on_fiber, ExpMap, SegrePolynomial};
use eac_core::subspace::ComplexSubspace;
use eac_core::variety::{EllipticFactor, ProductVariety};
use eac_core::weierstrass::{Backend, WpEvaluator};
use eac_core::{MultiQuad, Wp};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

type C = Complex<f64>;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub struct Config {
    /// Relative error injected into every `℘` value.
    pub fault: Option<f64>,
    pub seed: u64,
}

fn catalog() -> Vec<(&'static str, C)> {
    vec![
        ("i", C::new(0.0, 1.0)),
        ("i*sqrt(2)", C::new(0.0, 2f64.sqrt())),
        ("i*sqrt(5)", C::new(0.0, 5f64.sqrt())),
        ("exp(i*pi/3)", C::from_polar(1.0, PI / 3.0)),
        ("0.3+1.1i", C::new(0.3, 1.1)),
    ]
}

fn evaluator(tau: C, backend: Backend, cfg: &Config) -> Wp {
    let ev = WpEvaluator::new(tau, backend).expect("catalog lattices are valid");
    match cfg.fault {
        Some(r) => ev.with_fault(r),
        None => ev,
    }
}

/// Random points of the period parallelogram away from the lattice.
fn sample(tau: C, rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (x, y): (f64, f64) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        out.push(C::new(x, 0.0) + tau * y);
    }
    out
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn analytic(cfg: &Config, rows: &mut Vec<CheckRow>) {
    for (label, tau) in catalog() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let ev = evaluator(tau, Backend::Theta, cfg);
        let pts = sample(tau, &mut rng, 100);
        let mut parity = 0.0f64;
        let mut period = 0.0f64;
        let mut ode = 0.0f64;
        for &z in &pts {
            let (p, dp) = (ev.wp(z).unwrap(), ev.wp_prime(z).unwrap());
            parity = parity.max(rel(ev.wp(-z).unwrap(), p)).max(rel(-ev.wp_prime(-z).unwrap(), dp));
            period = period.max(rel(ev.wp(z + 1.0).unwrap(), p)).max(rel(ev.wp(z + tau).unwrap(), p));
            ode = ode.max(ev.ode_residual(z).unwrap());
        }
        rows.push(CheckRow {
            name: format!("wp parity [{label}]"),
            passed: parity < 1e-10,
            detail: format!("max rel {parity:.2e}"),
        });
        rows.push(CheckRow {
            name: format!("wp periodicity [{label}]"),
            passed: period < 1e-10,
            detail: format!("max rel {period:.2e}"),
        });
        rows.push(CheckRow {
            name: format!("wp ode [{label}]"),
            passed: ode < 1e-10,
            detail: format!("max rel residual {ode:.2e}"),
        });
        let other = evaluator(tau, Backend::LatticeSum, cfg);
        let mut agree = 0.0f64;
        for i in 0..10 {
            for k in 0..5 {
                let z = C::new((i as f64 + 0.5) / 10.0, 0.0) + tau * ((k as f64 + 0.5) / 5.0);
                agree = agree
                    .max(rel(ev.wp(z).unwrap(), other.wp(z).unwrap()))
                    .max(rel(ev.wp_prime(z).unwrap(), other.wp_prime(z).unwrap()));
            }
        }
        rows.push(CheckRow {
            name: format!("backend agreement [{label}]"),
            passed: agree < 1e-9,
            detail: format!("max rel {agree:.2e} on 50 points"),
        });
    }
}

fn example_variety() -> ProductVariety {
    ProductVariety::new(
        vec![
            EllipticFactor::imaginary(BigRational::one(), 2).unwrap(),
            EllipticFactor::imaginary(BigRational::one(), 5).unwrap(),
        ],
        true,
    )
    .unwrap()
}

fn diagonal() -> ComplexSubspace {
    ComplexSubspace::new(2, vec![vec![parse_complex("1").unwrap(), parse_complex("1").unwrap()]]).unwrap()
}

fn fibres(cfg: &Config, rows: &mut Vec<CheckRow>) {
    let a = example_variety();
    let evs: Vec<Wp> = a.factors().iter().map(|f| evaluator(f.tau(), Backend::Theta, cfg)).collect();
    let exp = ExpMap::from_evaluators(evs);
    let c = C::new(0.7, 0.2);
    for (k, expect, what) in [(3usize, 2u32, "wp - c"), (6, 3, "wp' - c")] {
        let f = SegrePolynomial::linear(&[(k, C::new(1.0, 0.0)), (0, -c)]);
        let counts: Vec<String> = (0..2)
            .map(|s| match count_roots_on_fiber(&f, 0, C::new(0.31, 0.77), &exp, cfg.seed + s) {
                Ok(n) => n.to_string(),
                Err(e) => e.to_string(),
            })
            .collect();
        rows.push(CheckRow {
            name: format!("fibre count {what}"),
            passed: counts.iter().all(|s| s == &expect.to_string()),
            detail: format!("jitters -> {}", counts.join(", ")),
        });
    }
}

fn exact(cfg: &Config, rows: &mut Vec<CheckRow>) {
    let a = example_variety();
    let l = diagonal();
    let h = rational_hull(&l, &a).unwrap();
    let chain = hull_chain(&l, &a).unwrap();
    let eq: Vec<String> = h.codim_equations.iter().flatten().map(ToString::to_string).collect();
    rows.push(CheckRow {
        name: "hull of the diagonal".into(),
        passed: h.dim_t == 3 && chain.k == 1 && eq == ["1", "0", "-1", "0"],
        detail: format!("dim T = {}, k = {}, equation {:?}", h.dim_t, chain.k, eq),
    });
    let eta = class_of_hypersurface(2, 2).unwrap().poincare_dual::<MultiQuad>();
    let cert = eac_certificate(&eta, &l, &a).unwrap();
    rows.push(CheckRow {
        name: "certificate of the diagonal".into(),
        passed: cert.value.to_string() == "2*sqrt(5)+2*sqrt(2)",
        detail: cert.value.to_string(),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let eqs = l.realify(&a).unwrap().equations();
    let n = eqs.first().map_or(0, Vec::len);
    let canonical = form_of_equations(n, &eqs);
    let mut bad = 0;
    for _ in 0..200 {
        let k = eqs.len();
        let m: Vec<Vec<MultiQuad>> = loop {
            let m: Vec<Vec<MultiQuad>> = (0..k)
                .map(|_| (0..k).map(|_| MultiQuad::from_int(rng.gen_range(-5..=5))).collect())
                .collect();
            if linalg::rank(&m) == k {
                break m;
            }
        };
        let mixed: Vec<Vec<MultiQuad>> = m.iter().map(|row| linalg::mat_vec(&linalg::transpose(&eqs, n), row)).collect();
        let form: ExteriorForm<MultiQuad> = form_of_equations(n, &mixed);
        if canonical.proportionality(&form).is_none() {
            bad += 1;
        }
    }
    rows.push(CheckRow {
        name: "recombined equations give proportional forms".into(),
        passed: bad == 0,
        detail: format!("{bad} of 200 not proportional"),
    });
}

/// Runs every check; the suite passes iff every row does.
pub fn run(cfg: &Config) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    analytic(cfg, &mut rows);
    fibres(cfg, &mut rows);
    exact(cfg, &mut rows);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes_and_fault_fails_the_ode() {
        let clean = run(&Config { fault: None, seed: 0 });
        assert!(clean.iter().all(|r| r.passed), "{clean:#?}");
        let faulty = run(&Config {
            fault: Some(1e-6),
            seed: 0,
        });
        assert!(faulty.iter().any(|r| r.name.starts_with("wp ode") && !r.passed));
    }
}
