//! The Segre image of `E₁ × E₂` in `ℙ⁸`, hypersurfaces `F = 0` in it, and
//! fibre root counts by the argument principle.
//!
//! Coordinates are `Z_{3i+j} = X_i·Y_j` with `X = [1 : ℘₁ : ℘₁′]` and
//! `Y = [1 : ℘₂ : ℘₂′]`, so `Z₀ = 1`, `Z₃ = ℘₁`, `Z₄ = ℘₁℘₂`, `Z₆ = ℘₁′`, …

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{EacError, Result};
use crate::variety::ProductVariety;
use crate::weierstrass::{Backend, CurvePoint, WpEvaluator};

type C = Complex<f64>;

fn cz() -> C {
    C::new(0.0, 0.0)
}

fn one() -> C {
    C::new(1.0, 0.0)
}

/// Point of the Segre image. `coords` is a projective representative:
/// a finite factor contributes `[1, ℘, ℘′]`, a factor at infinity `[0, 0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegrePoint {
    pub coords: [C; 9],
    pub at_infinity: [bool; 2],
}

impl SegrePoint {
    pub fn from_factors(x: CurvePoint<f64>, y: CurvePoint<f64>) -> Self {
        let proj = |p: CurvePoint<f64>| match p {
            CurvePoint::Finite { wp, dwp } => ([one(), wp, dwp], false),
            CurvePoint::AtInfinity => ([cz(), cz(), one()], true),
        };
        let (xs, xi) = proj(x);
        let (ys, yi) = proj(y);
        let mut coords = [cz(); 9];
        for i in 0..3 {
            for j in 0..3 {
                coords[3 * i + j] = xs[i] * ys[j];
            }
        }
        Self {
            coords,
            at_infinity: [xi, yi],
        }
    }

    pub fn is_affine(&self) -> bool {
        !self.at_infinity[0] && !self.at_infinity[1]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    /// Exponents of `Z₀, …, Z₈`.
    pub exps: [u32; 9],
    pub coeff: C,
}

/// Polynomial in the nine Segre coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SegrePolynomial {
    pub terms: Vec<Monomial>,
}

impl SegrePolynomial {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        if terms.is_empty() || terms.iter().all(|m| m.coeff.norm() == 0.0) {
            return Err(EacError::InvalidInput("W polynomial is identically zero".into()));
        }
        Ok(Self { terms })
    }

    /// `Σ cᵢ Z_{kᵢ}` for a linear form.
    pub fn linear(pairs: &[(usize, C)]) -> Self {
        let terms = pairs
            .iter()
            .map(|&(k, coeff)| {
                let mut exps = [0; 9];
                exps[k] = 1;
                Monomial { exps, coeff }
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, z: &[C; 9]) -> C {
        self.terms.iter().fold(cz(), |acc, m| {
            let v = m
                .exps
                .iter()
                .zip(z)
                .fold(m.coeff, |p, (&e, zk)| if e == 0 { p } else { p * zk.powu(e) });
            acc + v
        })
    }

    /// Sum of `|cᵢ|·|monomialᵢ|`, the scale against which cancellation is judged.
    pub fn magnitude(&self, z: &[C; 9]) -> f64 {
        self.terms.iter().fold(0.0, |acc, m| {
            let v = m
                .exps
                .iter()
                .zip(z)
                .fold(m.coeff.norm(), |p, (&e, zk)| p * zk.norm().powi(e as i32));
            acc + v
        })
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = |m: &Monomial| m.exps.iter().sum::<u32>();
        self.terms.windows(2).all(|w| d(&w[0]) == d(&w[1]))
    }

    /// Exponents of the `℘` and `℘′` of factor `which` in a monomial.
    fn factor_exponents(m: &Monomial, which: usize) -> (u32, u32) {
        let (mut e1, mut e2) = (0, 0);
        for (k, &e) in m.exps.iter().enumerate() {
            let idx = if which == 0 { k / 3 } else { k % 3 };
            match idx {
                1 => e1 += e,
                2 => e2 += e,
                _ => {}
            }
        }
        (e1, e2)
    }

    /// Value of the part of a monomial not involving factor `which`, with the
    /// other factor at `[1, ℘, ℘′] = y`.
    fn other_part(m: &Monomial, which: usize, y: [C; 3]) -> C {
        m.exps.iter().enumerate().fold(m.coeff, |p, (k, &e)| {
            let idx = if which == 0 { k % 3 } else { k / 3 };
            if e == 0 {
                p
            } else {
                p * y[idx].powu(e)
            }
        })
    }

    /// Laurent data `(order, leading coefficient, scale)` at the lattice point
    /// of the fibre through the other factor's point `y`, for each pole order
    /// present. `℘ ~ u⁻²`, `℘′ ~ −2u⁻³`.
    fn laurent_orders(&self, which: usize, y: [C; 3]) -> Vec<(u32, C, f64)> {
        let mut out: Vec<(u32, C, f64)> = Vec::new();
        for m in &self.terms {
            let (e1, e2) = Self::factor_exponents(m, which);
            let order = 2 * e1 + 3 * e2;
            let c = Self::other_part(m, which, y) * (-2.0f64).powi(e2 as i32);
            match out.iter_mut().find(|t| t.0 == order) {
                Some(t) => {
                    t.1 += c;
                    t.2 += c.norm();
                }
                None => out.push((order, c, c.norm())),
            }
        }
        out.sort_by(|a, b| b.0.cmp(&a.0));
        out
    }
}

/// `exp_A` for `A = ∏ Eⱼ`, one `℘` evaluator per factor.
#[derive(Clone, Debug)]
pub struct ExpMap {
    evs: Vec<WpEvaluator<f64>>,
}

impl ExpMap {
    pub fn new(a: &ProductVariety, backend: Backend) -> Result<Self> {
        let evs = a
            .factors()
            .iter()
            .map(|f| WpEvaluator::new(f.tau::<f64>(), backend))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { evs })
    }

    pub fn from_evaluators(evs: Vec<WpEvaluator<f64>>) -> Self {
        Self { evs }
    }

    /// Same lattices with the other backend at precision `eps`.
    pub fn sibling(&self, eps: f64) -> Result<Self> {
        let evs = self
            .evs
            .iter()
            .map(|e| e.sibling(e.backend().other(), eps))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { evs })
    }

    pub fn evaluator(&self, j: usize) -> &WpEvaluator<f64> {
        &self.evs[j]
    }

    pub fn g(&self) -> usize {
        self.evs.len()
    }

    pub fn backend(&self) -> Backend {
        self.evs[0].backend()
    }

    pub fn curve_point(&self, j: usize, z: C) -> CurvePoint<f64> {
        self.evs[j].eval(z)
    }

    pub fn segre(&self, z: &[C]) -> Result<SegrePoint> {
        if z.len() != 2 || self.g() != 2 {
            return Err(EacError::InvalidInput("Segre coordinates need g = 2".into()));
        }
        Ok(SegrePoint::from_factors(self.evs[0].eval(z[0]), self.evs[1].eval(z[1])))
    }

    /// `F(exp_A(z))` in the affine chart `Z₀ = 1`.
    pub fn eval_poly(&self, f: &SegrePolynomial, z: &[C]) -> Result<C> {
        let p = self.segre(z)?;
        if !p.is_affine() {
            return Err(EacError::AtInfinity);
        }
        Ok(f.eval(&p.coords))
    }

    /// `|F(exp_A(z))|`.
    pub fn residual(&self, f: &SegrePolynomial, z: &[C]) -> Result<f64> {
        Ok(self.eval_poly(f, z)?.norm())
    }

    /// Representative of `z mod Λ` in the centred period box.
    pub fn reduce(&self, z: &[C]) -> Vec<C> {
        z.iter().zip(&self.evs).map(|(zj, e)| e.reduce(*zj)).collect()
    }
}

/// Winding number of `f` along the closed path `path(s)`, `s ∈ [0, 1]`,
/// tracked adaptively so that no step turns the argument by more than `π/4`.
pub fn winding_number(f: &dyn Fn(C) -> Result<C>, path: &dyn Fn(f64) -> C, steps: usize) -> Result<f64> {
    fn seg(
        f: &dyn Fn(C) -> Result<C>,
        path: &dyn Fn(f64) -> C,
        s0: f64,
        s1: f64,
        v0: C,
        v1: C,
        depth: u32,
    ) -> Result<f64> {
        let d = (v1 / v0).arg();
        if d.abs() <= std::f64::consts::FRAC_PI_4 {
            return Ok(d);
        }
        if depth > 40 {
            return Err(EacError::ContourTooClose);
        }
        let sm = 0.5 * (s0 + s1);
        let vm = checked(f(path(sm))?)?;
        Ok(seg(f, path, s0, sm, v0, vm, depth + 1)? + seg(f, path, sm, s1, vm, v1, depth + 1)?)
    }
    fn checked(v: C) -> Result<C> {
        if !(v.norm() > 1e-300) || !v.norm().is_finite() {
            return Err(EacError::ContourTooClose);
        }
        Ok(v)
    }
    let mut total = 0.0;
    let mut prev = checked(f(path(0.0))?)?;
    for k in 1..=steps {
        let s = k as f64 / steps as f64;
        let cur = checked(f(path(s))?)?;
        total += seg(f, path, (k - 1) as f64 / steps as f64, s, prev, cur, 0)?;
        prev = cur;
    }
    Ok(total / std::f64::consts::TAU)
}

fn integral(w: f64) -> Result<i64> {
    if (w - w.round()).abs() > 1e-3 {
        return Err(EacError::ContourTooClose);
    }
    Ok(w.round() as i64)
}

/// Fibre of `W` through a point of the other factor.
struct Fibre<'a> {
    f: &'a SegrePolynomial,
    exp: &'a ExpMap,
    which: usize,
    other: C,
}

impl Fibre<'_> {
    fn eval(&self, u: C) -> Result<C> {
        let z = if self.which == 0 { [u, self.other] } else { [self.other, u] };
        self.exp.eval_poly(self.f, &z)
    }
}

/// Number of zeros, with multiplicity, of `u ↦ F(exp(u, p))` (or `F(exp(p, u))`
/// for `which = 1`) in one period parallelogram: the boundary winding number
/// plus the pole order at the lattice point, for two independent jitters of
/// the parallelogram.
pub fn count_roots_on_fiber(f: &SegrePolynomial, which: usize, fixed: C, exp: &ExpMap, seed: u64) -> Result<u32> {
    if which > 1 || exp.g() != 2 {
        return Err(EacError::InvalidInput("fibres are defined for g = 2, factor 0 or 1".into()));
    }
    let other = 1 - which;
    let y = match exp.curve_point(other, fixed) {
        CurvePoint::Finite { wp, dwp } => [one(), wp, dwp],
        CurvePoint::AtInfinity => {
            return Err(EacError::DegenerateFiber("fixed point is a pole; resample".into()))
        }
    };
    let fibre = Fibre { f, exp, which, other: fixed };
    let tau = exp.evaluator(which).tau();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // identically zero on the fibre: the fibre lies in W
    let probes: Vec<C> = (0..4)
        .map(|_| C::new(rng.gen_range(-0.5..0.5), 0.0) + tau * rng.gen_range(-0.5..0.5))
        .collect();
    let mut max_val: f64 = 0.0;
    let mut max_scale: f64 = 0.0;
    for u in &probes {
        let z = if which == 0 { [*u, fixed] } else { [fixed, *u] };
        let p = exp.segre(&z)?;
        if p.is_affine() {
            max_val = max_val.max(f.eval(&p.coords).norm());
            max_scale = max_scale.max(f.magnitude(&p.coords));
        }
    }
    if max_val <= 1e-12 * max_scale.max(1.0) {
        return Err(EacError::DegenerateFiber("F vanishes on the fibre; resample".into()));
    }

    let poles = pole_order(f, which, y, &fibre, tau)?;
    if poles == 0 {
        return Err(EacError::DegenerateFiber("F is constant on the fibre (no zeros)".into()));
    }
    let mut counts = Vec::with_capacity(2);
    for _ in 0..2 {
        let o = C::new(-0.5 + rng.gen_range(-0.1..0.1), 0.0) + tau * (-0.5 + rng.gen_range(-0.1..0.1));
        let corners = [o, o + 1.0, o + 1.0 + tau, o + tau];
        let path = |s: f64| {
            let t = 4.0 * s.clamp(0.0, 1.0);
            let k = (t.floor() as usize).min(3);
            let a = corners[k];
            let b = corners[(k + 1) % 4];
            a + (b - a) * (t - k as f64)
        };
        let w = integral(winding_number(&|u| fibre.eval(u), &path, 512)?)?;
        counts.push(w + poles as i64);
    }
    if counts[0] != counts[1] || counts[0] < 0 {
        return Err(EacError::ContourTooClose);
    }
    Ok(counts[0] as u32)
}

/// Pole order of the fibre function at the lattice point. `℘^a ℘′^b` is
/// `(−2)^b u^{-(2a+3b)}(1 + O(u⁴))`, so only the top order is read off the
/// monomials; if it cancels, the winding number on two small circles decides.
fn pole_order(f: &SegrePolynomial, which: usize, y: [C; 3], fibre: &Fibre<'_>, tau: C) -> Result<u32> {
    let orders = f.laurent_orders(which, y);
    if let Some(&(order, c, s)) = orders.first() {
        if c.norm() > 1e-9 * s {
            return Ok(order);
        }
    }
    let r0 = 1e-3 * tau.norm().min(1.0);
    let mut ws = Vec::new();
    for r in [r0, 0.1 * r0] {
        let path = |s: f64| C::from_polar(r, std::f64::consts::TAU * s);
        ws.push(integral(winding_number(&|u| fibre.eval(u), &path, 64)?)?);
    }
    if ws[0] != ws[1] || ws[0] > 0 {
        return Err(EacError::ContourTooClose);
    }
    Ok((-ws[0]) as u32)
}

/// Generic fibre degree: 0 when `F` is a nonzero constant on generic fibres.
pub fn fiber_degree(f: &SegrePolynomial, which: usize, exp: &ExpMap, seed: u64) -> Result<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1be);
    let tau = exp.evaluator(1 - which).tau();
    let mut best: Option<u32> = None;
    let mut attempts = 0;
    let mut successes = 0;
    while successes < 3 {
        attempts += 1;
        if attempts > 24 {
            return best.ok_or_else(|| EacError::DegenerateFiber("no usable fibre found".into()));
        }
        let p = C::new(rng.gen_range(-0.5..0.5), 0.0) + tau * rng.gen_range(-0.5..0.5);
        match count_roots_on_fiber(f, which, p, exp, rng.gen()) {
            Ok(n) => {
                best = Some(best.map_or(n, |b| b.max(n)));
                successes += 1;
            }
            Err(EacError::DegenerateFiber(msg)) if msg.contains("constant") => {
                best = Some(best.unwrap_or(0));
                successes += 1;
            }
            Err(EacError::DegenerateFiber(_)) | Err(EacError::ContourTooClose) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(best.unwrap_or(0))
}

/// `(m, n)`: zeros in `z₁` on a generic fibre `E₁ × {pt}` and zeros in `z₂` on
/// a generic fibre `{pt} × E₂`.
pub fn bidegree(f: &SegrePolynomial, exp: &ExpMap, seed: u64) -> Result<(u32, u32)> {
    Ok((fiber_degree(f, 0, exp, seed)?, fiber_degree(f, 1, exp, seed.wrapping_add(1))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variety::EllipticFactor;
    use num_rational::BigRational;
    use num_traits::One;

    fn exp() -> ExpMap {
        let a = ProductVariety::new(
            vec![
                EllipticFactor::imaginary(BigRational::one(), 2).unwrap(),
                EllipticFactor::imaginary(BigRational::one(), 5).unwrap(),
            ],
            true,
        )
        .unwrap();
        ExpMap::new(&a, Backend::Theta).unwrap()
    }

    fn lin(k: usize, c: f64) -> SegrePolynomial {
        SegrePolynomial::linear(&[(k, one()), (0, C::new(-c, 0.0))])
    }

    #[test]
    fn segre_product_structure() {
        let e = exp();
        let p = e.segre(&[C::new(0.3, 0.2), C::new(-0.1, 0.7)]).unwrap();
        assert!((p.coords[4] - p.coords[1] * p.coords[3]).norm() < 1e-12 * p.coords[4].norm());
        assert!((p.coords[8] - p.coords[2] * p.coords[6]).norm() < 1e-12 * p.coords[8].norm());
        let q = e.segre(&[C::new(0.0, 0.0), C::new(0.2, 0.1)]).unwrap();
        assert_eq!(q.at_infinity, [true, false]);
    }

    #[test]
    fn fibre_counts() {
        let e = exp();
        let p = C::new(0.31, 0.47);
        assert_eq!(count_roots_on_fiber(&lin(3, 0.7), 0, p, &e, 1).unwrap(), 2);
        assert_eq!(count_roots_on_fiber(&lin(6, 0.7), 0, p, &e, 2).unwrap(), 3);
        assert_eq!(count_roots_on_fiber(&lin(4, 1.0), 1, p, &e, 3).unwrap(), 2);
        let constant = SegrePolynomial::linear(&[(0, one())]);
        assert!(count_roots_on_fiber(&constant, 0, p, &e, 4).is_err());
    }

    #[test]
    fn bidegrees() {
        let e = exp();
        assert_eq!(bidegree(&lin(4, 1.0), &e, 7).unwrap(), (2, 2));
        assert_eq!(bidegree(&lin(3, 0.4), &e, 7).unwrap(), (2, 0));
        assert_eq!(bidegree(&lin(2, 0.4), &e, 7).unwrap(), (0, 3));
        assert_eq!(bidegree(&lin(7, 0.4), &e, 7).unwrap(), (3, 2));
    }
}
