//! Points of `exp_A(L) ∩ W` for a line `L` and a curve `W ⊂ E₁ × E₂`:
//! grid scan over fundamental-domain cells of the `L`-parameter, Newton
//! refinement, verification and deduplication in `A`.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use num_complex::Complex;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::delta::{embed, jacobian_probe};
use crate::error::{EacError, Result};
use crate::instance::{SolverConfig, WDescriptor, WKind};
use crate::multiquad::{ComplexMQ, MultiQuad};
use crate::segre::{winding_number, ExpMap, SegrePolynomial};
use crate::subspace::ComplexSubspace;
use crate::variety::ProductVariety;
use crate::weierstrass::Backend;

type C = Complex<f64>;

/// Newton derivative step.
pub const NEWTON_STEP: f64 = 1e-7;
/// Precision of the independent re-evaluation in [`verify_solution`].
pub const CHECK_EPS: f64 = 1e-14;
/// Cells processed per parallel batch; fixed so results do not depend on
/// the thread count.
pub const BATCH: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionPoint {
    /// `L`-parameter.
    pub l: Vec<[f64; 2]>,
    /// `z(l) ∈ ℂ^g`.
    pub z: Vec<[f64; 2]>,
    pub residual: f64,
    /// Residual re-evaluated with the other backend.
    pub residual_check: f64,
    pub winding: Option<i64>,
    pub jacobian_rank: usize,
    pub domain_cell: usize,
    pub cell: (i64, i64),
    pub iterations: usize,
}

impl SolutionPoint {
    pub fn l_complex(&self) -> Vec<C> {
        self.l.iter().map(|p| C::new(p[0], p[1])).collect()
    }

    pub fn z_complex(&self) -> Vec<C> {
        self.z.iter().map(|p| C::new(p[0], p[1])).collect()
    }
}

fn pair(c: C) -> [f64; 2] {
    [c.re, c.im]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Seed {
    pub t: [f64; 2],
    pub value: f64,
    pub cell: usize,
}

/// A fundamental-domain translate `t ∈ (x + p + (y + q)τⱼ)/vⱼ`, `x, y ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub index: usize,
    pub p: i64,
    pub q: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub solutions: Vec<SolutionPoint>,
    pub distinct_count: usize,
    pub distinct_cells: usize,
    pub cells_scanned: usize,
    pub cells_skipped_as_periodic: usize,
    pub seeds: usize,
    pub failures: BTreeMap<String, usize>,
    pub budget_exhausted: bool,
    pub target_count: usize,
    pub seed: u64,
    pub grid: usize,
    /// Solutions per cell index.
    pub cell_histogram: BTreeMap<usize, usize>,
    pub max_jacobian_rank: usize,
}

/// Everything the numeric search needs, built once per instance.
#[derive(Clone, Debug)]
pub struct SolverSetup {
    pub variety: ProductVariety,
    pub l: ComplexSubspace,
    pub basis: Vec<Vec<C>>,
    pub w: WDescriptor,
    pub cfg: SolverConfig,
    pub exp: ExpMap,
    pub check_exp: ExpMap,
    /// Factor whose lattice defines the cells.
    axis: usize,
    v_axis: C,
    tau_axis: C,
    v_exact: Vec<ComplexMQ>,
}

impl SolverSetup {
    /// `l` must already satisfy `dim L + dim W = g`.
    pub fn new(variety: &ProductVariety, l: &ComplexSubspace, w: &WDescriptor, cfg: &SolverConfig) -> Result<Self> {
        let g = variety.g();
        match &w.kind {
            WKind::SegreHypersurface(_) if g == 2 && l.dim() == 1 => {}
            WKind::Whole => {}
            WKind::Point(_) if l.dim() == g => {}
            _ => {
                return Err(EacError::InvalidInput(format!(
                    "solver supports a line against a curve in E1 x E2 or W = A (got dim L = {}, W kind {})",
                    l.dim(),
                    w.kind.name()
                )))
            }
        }
        let exp = ExpMap::new(variety, Backend::Theta)?;
        let check_exp = exp.sibling(CHECK_EPS)?;
        let basis = l.basis_f64();
        let v_exact = l.basis().first().cloned().unwrap_or_default();
        let axis = v_exact.iter().position(|x| !num_traits::Zero::is_zero(x)).unwrap_or(0);
        let v_axis = basis.first().map_or(C::new(1.0, 0.0), |v| v[axis]);
        let tau_axis = variety.factor(axis).tau::<f64>();
        Ok(Self {
            variety: variety.clone(),
            l: l.clone(),
            basis,
            w: w.clone(),
            cfg: cfg.clone(),
            exp,
            check_exp,
            axis,
            v_axis,
            tau_axis,
            v_exact,
        })
    }

    fn poly(&self) -> Option<&SegrePolynomial> {
        self.w.polynomial()
    }

    pub fn z_of(&self, t: C) -> Vec<C> {
        embed(&self.basis, &[t], self.variety.g())
    }

    /// `F(exp_A(z(t)))`.
    pub fn g_of(&self, t: C) -> Result<C> {
        match self.poly() {
            Some(f) => self.exp.eval_poly(f, &self.z_of(t)),
            None => Ok(C::new(0.0, 0.0)),
        }
    }

    fn g_check(&self, t: C) -> Result<C> {
        match self.poly() {
            Some(f) => self.check_exp.eval_poly(f, &self.z_of(t)),
            None => Ok(C::new(0.0, 0.0)),
        }
    }

    fn cell_point(&self, cell: &Cell, x: f64, y: f64) -> C {
        (C::new(x + cell.p as f64, 0.0) + self.tau_axis * (y + cell.q as f64)) / self.v_axis
    }

    /// Exact lattice coordinates of the unit cell offsets `(1, 0)` and `(0, 1)`.
    fn offset_coords(&self) -> Option<[Vec<MultiQuad>; 2]> {
        let v = self.v_exact.get(self.axis)?;
        let norm = &v.re * &v.re + &v.im * &v.im;
        let inv_norm = norm.inv()?;
        let vbar_over = Complex::new(v.re.clone() * inv_norm.clone(), -v.im.clone() * inv_norm);
        let tau = self.variety.factor(self.axis).tau_exact();
        let one = Complex::new(MultiQuad::one(), MultiQuad::zero());
        let coords = |shift: ComplexMQ| -> Option<Vec<MultiQuad>> {
            let d = shift * vbar_over.clone();
            let dz: Vec<ComplexMQ> = self.v_exact.iter().map(|vk| d.clone() * vk.clone()).collect();
            self.variety.to_lattice_coords_exact(&dz).ok()
        };
        Some([coords(one)?, coords(tau)?])
    }

    /// Class of the cell offset `(p, q)` modulo periods of `t ↦ exp_A(z(t))`:
    /// irrational parts of the lattice coordinates and fractional parts of the
    /// rational ones. Two cells are translates by a period iff they agree.
    fn fingerprint(&self, basis: &[Vec<MultiQuad>; 2], p: i64, q: i64) -> Vec<BigRational> {
        let (p, q) = (BigRational::from_integer(p.into()), BigRational::from_integer(q.into()));
        let mut out = Vec::new();
        for (a, b) in basis[0].iter().zip(&basis[1]) {
            let keys: std::collections::BTreeSet<u64> = a.keys().chain(b.keys()).collect();
            let mut keys: Vec<u64> = keys.into_iter().collect();
            if !keys.contains(&1) {
                keys.push(1);
            }
            for k in keys {
                let x = a.coefficient(k) * &p + b.coefficient(k) * &q;
                out.push(if k == 1 { &x - x.floor() } else { x });
            }
        }
        out
    }

    /// Whether shifting `t` by the cell offset `(p, q)` fixes `exp_A(z(t))`.
    pub fn is_period(&self, p: i64, q: i64) -> bool {
        match self.offset_coords() {
            Some(b) => self.fingerprint(&b, p, q) == self.fingerprint(&b, 0, 0),
            None => false,
        }
    }

    /// Cells in spiral order from the origin, skipping translates of earlier
    /// cells by periods of `t ↦ exp_A(z(t))`.
    pub fn cells(&self, max_cells: usize) -> (Vec<Cell>, usize) {
        let basis = self.offset_coords();
        let mut seen: HashSet<Vec<BigRational>> = HashSet::new();
        let mut out: Vec<Cell> = Vec::new();
        let mut skipped = 0;
        let mut ring = 0i64;
        while out.len() < max_cells && ring < 100_000 {
            for (p, q) in ring_cells(ring) {
                if out.len() >= max_cells {
                    break;
                }
                if let Some(b) = &basis {
                    if !seen.insert(self.fingerprint(b, p, q)) {
                        skipped += 1;
                        continue;
                    }
                }
                out.push(Cell { index: out.len(), p, q });
            }
            ring += 1;
        }
        (out, skipped)
    }

    fn cell_jitter(&self, cell: &Cell) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ (cell.index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))
    }
}

fn ring_cells(r: i64) -> Vec<(i64, i64)> {
    if r == 0 {
        return vec![(0, 0)];
    }
    let mut v = Vec::with_capacity(8 * r as usize);
    for q in -r..=r {
        v.push((r, q));
    }
    for p in (-r..r).rev() {
        v.push((p, r));
    }
    for q in (-r..r).rev() {
        v.push((-r, q));
    }
    for p in -r + 1..r {
        v.push((p, -r));
    }
    v
}

/// Grid local minima of `|F ∘ exp ∘ z|` below the coarse threshold in one cell.
pub fn scan_cell(setup: &SolverSetup, cell: &Cell, grid: usize) -> Vec<Seed> {
    let n = grid.max(2);
    let (jx, jy) = setup.cell_jitter(cell);
    let h = 1.0 / n as f64;
    // one ring of neighbours outside the cell so that edge minima are seen
    let vals: Vec<Vec<f64>> = (0..n + 2)
        .map(|i| {
            (0..n + 2)
                .map(|k| {
                    let x = (i as f64 - 1.0 + jx) * h;
                    let y = (k as f64 - 1.0 + jy) * h;
                    setup
                        .g_of(setup.cell_point(cell, x, y))
                        .map(|v| v.norm())
                        .unwrap_or(f64::INFINITY)
                })
                .collect()
        })
        .collect();
    let mut seeds = Vec::new();
    for i in 1..=n {
        for k in 1..=n {
            let v = vals[i][k];
            if !(v < setup.cfg.coarse_threshold) {
                continue;
            }
            let is_min = (i - 1..=i + 1).all(|a| (k - 1..=k + 1).all(|b| (a == i && b == k) || vals[a][b] >= v));
            if is_min {
                let t = setup.cell_point(cell, (i as f64 - 1.0 + jx) * h, (k as f64 - 1.0 + jy) * h);
                seeds.push(Seed {
                    t: pair(t),
                    value: v,
                    cell: cell.index,
                });
            }
        }
    }
    seeds
}

/// Seeds from the first `n_cells` cells, sorted by value.
pub fn coarse_scan(setup: &SolverSetup, n_cells: usize, grid: usize) -> Vec<Seed> {
    let (cells, _) = setup.cells(n_cells);
    let mut seeds: Vec<Seed> = cells.par_iter().flat_map_iter(|c| scan_cell(setup, c, grid)).collect();
    seeds.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal));
    seeds
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonFailure {
    pub reason: String,
    pub t: [f64; 2],
}

/// Damped Newton on `t ↦ F(exp_A(z(t)))` with a central-difference
/// derivative. Returns the refined parameter, residual and iteration count.
pub fn newton(setup: &SolverSetup, t0: C) -> std::result::Result<(C, f64, usize), NewtonFailure> {
    let fail = |reason: &str, t: C| NewtonFailure {
        reason: reason.into(),
        t: pair(t),
    };
    let eval = |t: C| setup.g_of(t).map_err(|e| fail(&e.to_string(), t));
    let tol = setup.cfg.newton_tol;
    let mut t = t0;
    let mut v = eval(t)?;
    let mut it = 0;
    let mut polished = false;
    while it < setup.cfg.newton_max_iter {
        if v.norm() < tol {
            if polished {
                break;
            }
            polished = true;
        }
        let h = NEWTON_STEP * (1.0 + t.norm());
        let d = (eval(t + h)? - eval(t - h)?) / (2.0 * h);
        if !(d.norm() > 1e-14) || !d.norm().is_finite() {
            return Err(fail("singular derivative", t));
        }
        let step = v / d;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let cand = t - step * lambda;
            if let Ok(cv) = setup.g_of(cand) {
                if cv.norm() < v.norm() || (polished && cv.norm() <= tol) {
                    accepted = Some((cand, cv));
                    break;
                }
            }
            lambda *= 0.5;
        }
        it += 1;
        match accepted {
            Some((nt, nv)) => {
                t = nt;
                v = nv;
            }
            None if v.norm() < tol => break,
            None => return Err(fail("no descent", t)),
        }
    }
    if v.norm() < tol {
        Ok((t, v.norm(), it))
    } else {
        Err(fail("no convergence", t))
    }
}

/// Newton from a seed, then verification and the Jacobian probe.
pub fn newton_refine(setup: &SolverSetup, seed: &Seed, cell: &Cell) -> std::result::Result<SolutionPoint, NewtonFailure> {
    let t0 = C::new(seed.t[0], seed.t[1]);
    let (t, residual, iterations) = newton(setup, t0)?;
    let z = setup.z_of(t);
    let rank = jacobian_probe(&setup.basis, &[t], &z, &setup.w, &setup.exp)
        .map(|p| p.rank)
        .unwrap_or(0);
    let mut s = SolutionPoint {
        l: vec![pair(t)],
        z: z.iter().map(|c| pair(*c)).collect(),
        residual,
        residual_check: f64::NAN,
        winding: None,
        jacobian_rank: rank,
        domain_cell: cell.index,
        cell: (cell.p, cell.q),
        iterations,
    };
    let (ok, check, winding) = verify_details(setup, &s);
    s.residual_check = check;
    s.winding = winding;
    if ok {
        Ok(s)
    } else {
        Err(NewtonFailure {
            reason: "verification failed".into(),
            t: pair(t),
        })
    }
}

fn verify_details(setup: &SolverSetup, s: &SolutionPoint) -> (bool, f64, Option<i64>) {
    if setup.poly().is_none() {
        return (true, 0.0, None);
    }
    let t = s.l_complex()[0];
    let check = match setup.g_check(t) {
        Ok(v) => v.norm(),
        Err(_) => return (false, f64::INFINITY, None),
    };
    if !(check < setup.cfg.newton_tol) {
        return (false, check, None);
    }
    let r = 1e-4 * (setup.tau_axis / setup.v_axis).norm().min(1.0);
    let path = |u: f64| t + C::from_polar(r, std::f64::consts::TAU * u);
    let winding = winding_number(&|x| setup.g_of(x), &path, 64).ok().map(|w| w.round() as i64);
    let ok = winding.is_some_and(|w| w >= 1);
    (ok, check, winding)
}

/// Residual below tolerance under the other backend at higher precision, and
/// (for a line) winding number at least 1 on a small circle around `l`.
pub fn verify_solution(setup: &SolverSetup, s: &SolutionPoint) -> bool {
    verify_details(setup, s).0
}

fn is_duplicate(setup: &SolverSetup, found: &[SolutionPoint], z: &[C]) -> bool {
    found
        .iter()
        .any(|s| setup.variety.distance_in_a(&s.z_complex(), z) < setup.cfg.dedup_tol)
}

fn with_threads<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let n = std::env::var("EAC_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    match n.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Scans cells in spiral order until `target` distinct verified solutions are
/// found, `max_cells` are used up, or the time budget runs out.
pub fn harvest(setup: &SolverSetup, target: usize) -> SolveReport {
    let start = Instant::now();
    let cfg = &setup.cfg;
    let mut report = SolveReport {
        solutions: vec![],
        distinct_count: 0,
        distinct_cells: 0,
        cells_scanned: 0,
        cells_skipped_as_periodic: 0,
        seeds: 0,
        failures: BTreeMap::new(),
        budget_exhausted: false,
        target_count: target,
        seed: cfg.seed,
        grid: cfg.grid,
        cell_histogram: BTreeMap::new(),
        max_jacobian_rank: 0,
    };
    if setup.poly().is_none() {
        // W = A meets exp(L) at 0; a point w meets exp(ℂ^g) at w itself
        let (l, z) = match &setup.w.kind {
            WKind::Point(w) => match point_parameter(setup, w) {
                Some(l) => (l, w.clone()),
                None => {
                    *report.failures.entry("singular basis".into()).or_insert(0) += 1;
                    finish(&mut report);
                    return report;
                }
            },
            _ => (vec![C::new(0.0, 0.0); setup.l.dim()], vec![C::new(0.0, 0.0); setup.variety.g()]),
        };
        report.solutions.push(SolutionPoint {
            l: l.into_iter().map(pair).collect(),
            z: z.into_iter().map(pair).collect(),
            residual: 0.0,
            residual_check: 0.0,
            winding: None,
            jacobian_rank: setup.variety.g(),
            domain_cell: 0,
            cell: (0, 0),
            iterations: 0,
        });
        finish(&mut report);
        return report;
    }
    let (cells, skipped) = setup.cells(cfg.max_cells);
    report.cells_skipped_as_periodic = skipped;
    with_threads(|| {
        for batch in cells.chunks(BATCH) {
            if start.elapsed().as_secs_f64() > cfg.budget_secs {
                report.budget_exhausted = true;
                break;
            }
            let results: Vec<(usize, Vec<std::result::Result<SolutionPoint, NewtonFailure>>)> = batch
                .par_iter()
                .map(|cell| {
                    let seeds = scan_cell(setup, cell, cfg.grid);
                    let n = seeds.len();
                    (n, seeds.iter().map(|s| newton_refine(setup, s, cell)).collect())
                })
                .collect();
            report.cells_scanned += batch.len();
            for (n_seeds, outcomes) in results {
                report.seeds += n_seeds;
                for o in outcomes {
                    match o {
                        Ok(s) => {
                            if report.solutions.len() < target && !is_duplicate(setup, &report.solutions, &s.z_complex()) {
                                report.solutions.push(s);
                            }
                        }
                        Err(e) => *report.failures.entry(e.reason).or_insert(0) += 1,
                    }
                }
            }
            if report.solutions.len() >= target {
                break;
            }
        }
    });
    finish(&mut report);
    report
}

/// `l` with `Σ lₖ vₖ = w` for a basis `v` of `L = ℂ^g`.
fn point_parameter(setup: &SolverSetup, w: &[C]) -> Option<Vec<C>> {
    let g = setup.variety.g();
    let m = nalgebra::DMatrix::from_fn(g, g, |i, k| setup.basis[k][i]);
    let rhs = nalgebra::DVector::from_column_slice(w);
    m.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}

fn finish(report: &mut SolveReport) {
    report.distinct_count = report.solutions.len();
    report.cell_histogram.clear();
    for s in &report.solutions {
        *report.cell_histogram.entry(s.domain_cell).or_insert(0) += 1;
    }
    report.distinct_cells = report.cell_histogram.len();
    report.max_jacobian_rank = report.solutions.iter().map(|s| s.jacobian_rank).max().unwrap_or(0);
}
