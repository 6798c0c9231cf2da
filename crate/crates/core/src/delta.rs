//! The map `δ(l, w) = w − exp_A(l)` on `L × W` and the numerical rank of its
//! differential.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{EacError, Result};
use crate::instance::{WDescriptor, WKind};
use crate::linalg;
use crate::segre::ExpMap;
use crate::variety::ProductVariety;

type C = Complex<f64>;

/// Finite-difference step of the probe.
pub const PROBE_STEP: f64 = 1e-6;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-8;
/// Maximum `|F ∘ exp|` for a point to count as lying on `W`.
pub const ON_W_TOL: f64 = 1e-8;

/// `z(l) = Σ lₖ vₖ` for the numeric basis `v` of `L`.
pub fn embed(basis: &[Vec<C>], l: &[C], g: usize) -> Vec<C> {
    let mut z = vec![C::new(0.0, 0.0); g];
    for (lk, v) in l.iter().zip(basis) {
        for (zj, vj) in z.iter_mut().zip(v) {
            *zj += lk * vj;
        }
    }
    z
}

/// `δ(l, w)` lifted to `ℂ^g` (no reduction).
fn delta_lift(basis: &[Vec<C>], l: &[C], w: &[C]) -> Vec<C> {
    let z = embed(basis, l, w.len());
    w.iter().zip(&z).map(|(a, b)| a - b).collect()
}

/// `δ(l, w) = w − exp_A(l)`, reduced into the centred period box.
pub fn delta_map(basis: &[Vec<C>], l: &[C], w: &[C], a: &ProductVariety) -> Vec<C> {
    a.reduce(&delta_lift(basis, l, w)).0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobianProbe {
    /// Complex rank (half the real rank).
    pub rank: usize,
    pub real_rank: usize,
    pub singular_values: Vec<f64>,
}

/// Local chart of `W` around `w`: tangent basis and a projection back onto `W`.
struct Chart<'a> {
    tangent: Vec<Vec<C>>,
    grad: Vec<C>,
    w_desc: &'a WDescriptor,
    exp: &'a ExpMap,
}

impl Chart<'_> {
    fn g_val(&self, z: &[C]) -> Result<C> {
        match &self.w_desc.kind {
            WKind::SegreHypersurface(f) => self.exp.eval_poly(f, z),
            _ => Ok(C::new(0.0, 0.0)),
        }
    }

    /// Newton along the fixed normal direction `conj(∇G)` back onto `G = 0`.
    fn project(&self, z: Vec<C>) -> Result<Vec<C>> {
        if !matches!(self.w_desc.kind, WKind::SegreHypersurface(_)) {
            return Ok(z);
        }
        let dir: Vec<C> = self.grad.iter().map(|x| x.conj()).collect();
        let slope: C = self.grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let mut p = z;
        for _ in 0..20 {
            let v = self.g_val(&p)?;
            if v.norm() < 1e-14 {
                break;
            }
            let t = v / slope;
            for (pj, dj) in p.iter_mut().zip(&dir) {
                *pj -= t * dj;
            }
        }
        Ok(p)
    }
}

/// Holomorphic gradient of `F ∘ exp` by central differences.
pub fn gradient(exp: &ExpMap, f: &crate::segre::SegrePolynomial, z: &[C], h: f64) -> Result<Vec<C>> {
    (0..z.len())
        .map(|j| {
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[j] += h;
            zm[j] -= h;
            Ok((exp.eval_poly(f, &zp)? - exp.eval_poly(f, &zm)?) / (2.0 * h))
        })
        .collect()
}

/// Numerical rank of `dδ` at `(l, w)` on `L × W` (central differences of
/// step [`PROBE_STEP`] in real coordinates, SVD with relative tolerance
/// [`RANK_TOL`]). Rank `g` certifies that `δ` is open there.
pub fn jacobian_probe(basis: &[Vec<C>], l: &[C], w: &[C], w_desc: &WDescriptor, exp: &ExpMap) -> Result<JacobianProbe> {
    let g = w.len();
    let (tangent, grad) = match &w_desc.kind {
        WKind::SegreHypersurface(f) => {
            let r = exp.residual(f, w)?;
            if r > ON_W_TOL {
                return Err(EacError::OffVariety(r));
            }
            let grad = gradient(exp, f, w, PROBE_STEP)?;
            (linalg::null_space(std::slice::from_ref(&grad), g), grad)
        }
        WKind::Whole => (
            (0..g)
                .map(|i| (0..g).map(|j| C::new((i == j) as u8 as f64, 0.0)).collect())
                .collect(),
            vec![],
        ),
        WKind::Point(_) => (vec![], vec![]),
    };
    let chart = Chart {
        tangent,
        grad,
        w_desc,
        exp,
    };
    let h = PROBE_STEP;
    let n_l = l.len();
    let n_w = chart.tangent.len();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let to_real = |v: &[C]| v.iter().flat_map(|c| [c.re, c.im]).collect::<Vec<f64>>();
    let diff = |p: &[C], m: &[C]| -> Vec<C> { p.iter().zip(m).map(|(a, b)| (a - b) / (2.0 * h)).collect() };
    for k in 0..n_l {
        for unit in [C::new(1.0, 0.0), C::new(0.0, 1.0)] {
            let mut lp = l.to_vec();
            let mut lm = l.to_vec();
            lp[k] += unit * h;
            lm[k] -= unit * h;
            cols.push(to_real(&diff(&delta_lift(basis, &lp, w), &delta_lift(basis, &lm, w))));
        }
    }
    for k in 0..n_w {
        for unit in [C::new(1.0, 0.0), C::new(0.0, 1.0)] {
            let step = |s: f64| -> Result<Vec<C>> {
                let z: Vec<C> = w.iter().zip(&chart.tangent[k]).map(|(a, t)| a + unit * t * s).collect();
                chart.project(z)
            };
            let (wp, wm) = (step(h)?, step(-h)?);
            cols.push(to_real(&diff(&delta_lift(basis, l, &wp), &delta_lift(basis, l, &wm))));
        }
    }
    let ncols = cols.len();
    if ncols == 0 {
        return Ok(JacobianProbe {
            rank: 0,
            real_rank: 0,
            singular_values: vec![],
        });
    }
    let m = DMatrix::from_fn(2 * g, ncols, |i, j| cols[j][i]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let top = sv.first().copied().unwrap_or(0.0);
    let real_rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
    Ok(JacobianProbe {
        rank: real_rank / 2,
        real_rank,
        singular_values: sv,
    })
}
