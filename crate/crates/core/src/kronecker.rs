//! How well lattice translates of points of `exp_A(L)` fill the closure
//! `𝕋 = T / (T ∩ ℤ^{2g})` in lattice coordinates.

use num_complex::Complex;
use num_integer::Integer;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EacError, Result};
use crate::hull::rational_hull;
use crate::subspace::ComplexSubspace;
use crate::variety::ProductVariety;

type C = Complex<f64>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KroneckerReport {
    pub n_points: usize,
    /// Grid values of `Re t`.
    pub nx: usize,
    /// Steps of `Im t`.
    pub ny: usize,
    pub step: f64,
    pub probes: usize,
    pub dim_t: usize,
    /// Largest distance from a probe of `𝕋` to the nearest sample.
    pub covering_radius: f64,
}

/// The first `n` points `exp_A((x + i·k·step)·v)` in lattice coordinates
/// mod 1, for `x = (i + ½)/nx`, ordered by `k` then `i`.
pub fn torus_points(a: &ProductVariety, v: &[C], nx: usize, n: usize, step: f64) -> Vec<Vec<f64>> {
    let ny = n.div_ceil(nx);
    let mut out = Vec::with_capacity(nx * ny);
    for k in 0..ny {
        for i in 0..nx {
            let t = C::new((i as f64 + 0.5) / nx as f64, k as f64 * step);
            let z: Vec<C> = v.iter().map(|vj| t * vj).collect();
            out.push(a.to_lattice_coords(&z).iter().map(|x| x.rem_euclid(1.0)).collect());
        }
    }
    out.truncate(n);
    out
}

fn torus_dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            let d = d.min(1.0 - d);
            d * d
        })
        .sum()
}

/// Max over probes of the distance to the nearest point (brute force, with
/// wrap-around).
pub fn covering_radius(points: &[Vec<f64>], probes: &[Vec<f64>]) -> f64 {
    probes
        .par_iter()
        .map(|p| points.iter().map(|q| torus_dist2(p, q)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// Integer vectors spanning a finite-index sublattice of `T ∩ ℤ^{2g}`.
fn integer_basis(l: &ComplexSubspace, a: &ProductVariety) -> Result<Vec<Vec<f64>>> {
    let hull = rational_hull(l, a)?;
    hull.t
        .basis()
        .iter()
        .map(|row| {
            let qs: Vec<_> = row
                .iter()
                .map(|x| {
                    x.as_rational()
                        .ok_or_else(|| EacError::InvalidInput("hull basis is not rational".into()))
                })
                .collect::<Result<_>>()?;
            let lcm = qs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            Ok(qs
                .iter()
                .map(|q| (q.numer() * (&lcm / q.denom())).to_f64().unwrap_or(f64::NAN))
                .collect())
        })
        .collect()
}

/// Uniform points of `𝕋`: uniform coefficients on an integer basis of `T`
/// push forward to the uniform measure on the subtorus.
pub fn torus_probes(l: &ComplexSubspace, a: &ProductVariety, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let basis = integer_basis(l, a)?;
    let n = 2 * a.g();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let mut p = vec![0.0; n];
            for e in &basis {
                let c: f64 = rng.gen_range(0.0..1.0);
                for (pi, ei) in p.iter_mut().zip(e) {
                    *pi += c * ei;
                }
            }
            p.iter().map(|x| x.rem_euclid(1.0)).collect()
        })
        .collect())
}

/// Covering radius of `n_points` samples of `exp_A(L)` in `𝕋`, for a line
/// `L`. `Re t` gets about `n^{1/3}` grid values and `Im t` the remaining
/// factor as equal steps; the step is chosen from a fixed candidate list by a
/// cheap probe estimate, then the radius is measured with `probes` fresh
/// probes.
pub fn kronecker_covering(a: &ProductVariety, l: &ComplexSubspace, n_points: usize, probes: usize, seed: u64) -> Result<KroneckerReport> {
    if l.dim() != 1 {
        return Err(EacError::InvalidInput("covering check expects a line L".into()));
    }
    let v = &l.basis_f64()[0];
    let nx = (n_points as f64).cbrt().ceil() as usize;
    let ny = n_points.div_ceil(nx);
    let coarse = torus_probes(l, a, 500, seed)?;
    let mut scored: Vec<(f64, f64)> = (1..=60)
        .map(|k| {
            let step = 0.05 * k as f64;
            (covering_radius(&torus_points(a, v, nx, n_points, step), &coarse), step)
        })
        .collect();
    scored.sort_by(|x, y| x.0.total_cmp(&y.0));
    let fine = torus_probes(l, a, 5000, seed.wrapping_add(1))?;
    let step = scored
        .iter()
        .take(5)
        .map(|&(_, s)| (covering_radius(&torus_points(a, v, nx, n_points, s), &fine), s))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, s)| s)
        .unwrap_or(1.0);
    let points = torus_points(a, v, nx, n_points, step);
    let test = torus_probes(l, a, probes, seed.wrapping_add(2))?;
    Ok(KroneckerReport {
        n_points: points.len(),
        nx,
        ny,
        step,
        probes,
        dim_t: rational_hull(l, a)?.dim_t,
        covering_radius: covering_radius(&points, &test),
    })
}
