//! Weierstrass `℘` and `℘′` for `Λ = ℤ + τℤ`, and the invariants `g₂, g₃`.
//!
//! Every evaluation first moves `τ` into the standard fundamental domain of
//! `SL₂(ℤ)` (`τ′ = (aτ+b)/(cτ+d)`, `μ = cτ+d`, so `Λ = μ·(ℤ + τ′ℤ)`) and `z/μ`
//! into the period parallelogram of the reduced lattice. Then
//! `℘(z; Λ) = μ⁻² ℘(z/μ; Λ′)` and `℘′(z; Λ) = μ⁻³ ℘′(z/μ; Λ′)`.

use std::fmt::Debug;

use num_complex::Complex;
use num_traits::{Float, FloatConst};

use crate::error::{EacError, Result};

/// Floating-point scalar for the analytic code paths.
pub trait Real: Float + FloatConst + Debug + Send + Sync + 'static {}
impl<T: Float + FloatConst + Debug + Send + Sync + 'static> Real for T {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Jacobi theta quotients with nome `e^{iπτ}`.
    Theta,
    /// Lattice sum with each row `Σ_m (w − nτ − m)⁻²` in closed form.
    LatticeSum,
}

impl Backend {
    pub fn other(self) -> Backend {
        match self {
            Backend::Theta => Backend::LatticeSum,
            Backend::LatticeSum => Backend::Theta,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Theta => "theta",
            Backend::LatticeSum => "lattice-sum",
        }
    }
}

/// Image of `z` under `z ↦ [1 : ℘(z) : ℘′(z)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurvePoint<T> {
    Finite { wp: Complex<T>, dwp: Complex<T> },
    /// `z ∈ Λ`, the point `[0 : 0 : 1]`.
    AtInfinity,
}

impl<T: Real> CurvePoint<T> {
    pub fn finite(self) -> Result<(Complex<T>, Complex<T>)> {
        match self {
            CurvePoint::Finite { wp, dwp } => Ok((wp, dwp)),
            CurvePoint::AtInfinity => Err(EacError::AtInfinity),
        }
    }
}

/// Distance to `Λ` below which a point is reported at infinity.
pub const POLE_RADIUS: f64 = 1e-12;
/// Default relative precision target.
pub const DEFAULT_EPS: f64 = 1e-12;

fn c<T: Real>(x: f64) -> T {
    T::from(x).unwrap()
}

#[derive(Clone, Debug)]
pub struct WpEvaluator<T: Real> {
    tau: Complex<T>,
    backend: Backend,
    eps: T,
    /// Reduced period ratio.
    tau_red: Complex<T>,
    mu: Complex<T>,
    /// Truncation order of the theta series or of the row sum.
    terms: usize,
    /// `q^{(n+½)²}` and `q^{n²}` for the theta series.
    q_half: Vec<Complex<T>>,
    q_int: Vec<Complex<T>>,
    /// `θ₂(0)θ₃(0)`, `θ₂(0)θ₃(0)θ₄(0)`, `θ₂(0)⁴ + θ₃(0)⁴`.
    theta23: Complex<T>,
    theta_prod: Complex<T>,
    theta_sum4: Complex<T>,
    /// `Σ_{n≥1} 2π²/sin²(πnτ′)` for the lattice sum.
    row_const: Complex<T>,
    g2: Complex<T>,
    g3: Complex<T>,
    fault: Option<T>,
}

/// `(a, b, c, d)` with `(aτ+b)/(cτ+d)` in the standard fundamental domain.
fn sl2_reduce<T: Real>(tau: Complex<T>) -> (i64, i64, i64, i64) {
    let (mut a, mut b, mut cc, mut d) = (1i64, 0i64, 0i64, 1i64);
    let mut t = tau;
    for _ in 0..200 {
        let n = t.re.round();
        let ni = n.to_i64().unwrap_or(0);
        t = Complex::new(t.re - n, t.im);
        a -= ni * cc;
        b -= ni * d;
        if t.norm_sqr() < T::one() - c::<T>(1e-13) {
            t = -t.inv();
            (a, b, cc, d) = (-cc, -d, a, b);
        } else {
            break;
        }
    }
    (a, b, cc, d)
}

impl<T: Real> WpEvaluator<T> {
    pub fn new(tau: Complex<T>, backend: Backend) -> Result<Self> {
        let eps = c::<T>(DEFAULT_EPS).max(T::epsilon() * c(10.0));
        Self::with_eps(tau, backend, eps)
    }

    pub fn with_eps(tau: Complex<T>, backend: Backend, eps: T) -> Result<Self> {
        if !(tau.im > T::zero()) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(EacError::InvalidInput("Im(tau) must be positive".into()));
        }
        let (a, b, cc, d) = sl2_reduce(tau);
        let ti = |n: i64| c::<T>(n as f64);
        let mu = tau * ti(cc) + ti(d);
        let tau_red = (tau * ti(a) + ti(b)) / mu;
        let s = tau_red.im;
        let pi = T::PI();
        let i = Complex::new(T::zero(), T::one());

        // Theta: term n of θ(v) at |Im v| ≤ π s/2 is at most e^{-π s (n² − 1/4)};
        // row sum: row n contributes at most 8π² e^{-2π s (n − 1/2)}.
        let log_eps = -(eps * c(1e-2)).ln();
        let terms = match backend {
            Backend::Theta => ((log_eps / (pi * s) + c(0.25)).sqrt().ceil().to_usize().unwrap_or(8)) + 1,
            Backend::LatticeSum => {
                (((c::<T>(8.0) * pi * pi).ln() + log_eps) / (c::<T>(2.0) * pi * s) + c(0.5))
                    .ceil()
                    .to_usize()
                    .unwrap_or(16)
                    + 1
            }
        };
        let ipt = i * pi * tau_red;
        let q_half: Vec<Complex<T>> = (0..=terms)
            .map(|n| {
                let h = ti(n as i64) + c(0.5);
                (ipt * h * h).exp()
            })
            .collect();
        let q_int: Vec<Complex<T>> = (0..=terms).map(|n| (ipt * ti((n * n) as i64)).exp()).collect();

        let mut ev = Self {
            tau,
            backend,
            eps,
            tau_red,
            mu,
            terms,
            q_half,
            q_int,
            theta23: Complex::new(T::zero(), T::zero()),
            theta_prod: Complex::new(T::zero(), T::zero()),
            theta_sum4: Complex::new(T::zero(), T::zero()),
            row_const: Complex::new(T::zero(), T::zero()),
            g2: Complex::new(T::zero(), T::zero()),
            g3: Complex::new(T::zero(), T::zero()),
            fault: None,
        };
        let zero = Complex::new(T::zero(), T::zero());
        let (t2, t3, t4) = (ev.theta2(zero), ev.theta3(zero), ev.theta4(zero));
        ev.theta23 = t2 * t3;
        ev.theta_prod = t2 * t3 * t4;
        ev.theta_sum4 = t2.powi(4) + t3.powi(4);
        let mut rc = zero;
        for n in 1..=terms {
            let sn = (tau_red * pi * ti(n as i64)).sin();
            rc = rc + Complex::new(c::<T>(2.0) * pi * pi, T::zero()) / (sn * sn);
        }
        ev.row_const = rc;
        let (g2r, g3r) = eisenstein_invariants(tau_red, eps);
        ev.g2 = g2r / mu.powi(4);
        ev.g3 = g3r / mu.powi(6);
        Ok(ev)
    }

    /// Corrupts `℘` by the relative factor `1 + rel` (fault injection).
    pub fn with_fault(mut self, rel: T) -> Self {
        self.fault = Some(rel);
        self
    }

    pub fn tau(&self) -> Complex<T> {
        self.tau
    }

    pub fn reduced_tau(&self) -> Complex<T> {
        self.tau_red
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// `(g₂, g₃)` of `ℤ + τℤ`.
    pub fn invariants(&self) -> (Complex<T>, Complex<T>) {
        (self.g2, self.g3)
    }

    /// Same lattice, other backend.
    pub fn sibling(&self, backend: Backend, eps: T) -> Result<Self> {
        let mut s = Self::with_eps(self.tau, backend, eps)?;
        s.fault = self.fault;
        Ok(s)
    }

    /// `z mod Λ` with lattice coordinates in `[-1/2, 1/2]`.
    pub fn reduce(&self, z: Complex<T>) -> Complex<T> {
        let y = (z.im / self.tau.im).round();
        let z = z - self.tau * y;
        Complex::new(z.re - z.re.round(), z.im)
    }

    /// Reduced argument `w = z/μ mod Λ′`.
    fn reduce_red(&self, z: Complex<T>) -> Complex<T> {
        let w = z / self.mu;
        let y = (w.im / self.tau_red.im).round();
        let w = w - self.tau_red * y;
        let x = w.re.round();
        Complex::new(w.re - x, w.im)
    }

    pub fn eval(&self, z: Complex<T>) -> CurvePoint<T> {
        let w = self.reduce_red(z);
        if (w * self.mu).norm() < c(POLE_RADIUS) {
            return CurvePoint::AtInfinity;
        }
        let (wp, dwp) = match self.backend {
            Backend::Theta => self.eval_theta(w),
            Backend::LatticeSum => self.eval_sum(w),
        };
        let mu2 = self.mu * self.mu;
        let mut wp = wp / mu2;
        let dwp = dwp / (mu2 * self.mu);
        if let Some(rel) = self.fault {
            wp = wp * (T::one() + rel);
        }
        CurvePoint::Finite { wp, dwp }
    }

    pub fn wp(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.eval(z).finite()?.0)
    }

    pub fn wp_prime(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.eval(z).finite()?.1)
    }

    /// `|℘′² − (4℘³ − g₂℘ − g₃)|`, relative to the size of the terms.
    pub fn ode_residual(&self, z: Complex<T>) -> Result<T> {
        let (p, dp) = self.eval(z).finite()?;
        let four = c::<T>(4.0);
        let rhs = p * p * p * four - self.g2 * p - self.g3;
        let scale = T::one()
            .max((dp * dp).norm())
            .max((p * p * p * four).norm())
            .max((self.g2 * p).norm())
            .max(self.g3.norm());
        Ok((dp * dp - rhs).norm() / scale)
    }

    fn theta1(&self, v: Complex<T>) -> Complex<T> {
        let mut s = Complex::new(T::zero(), T::zero());
        for n in 0..=self.terms {
            let k = c::<T>((2 * n + 1) as f64);
            let t = self.q_half[n] * (v * k).sin();
            s = if n % 2 == 0 { s + t } else { s - t };
        }
        s * c::<T>(2.0)
    }

    fn theta2(&self, v: Complex<T>) -> Complex<T> {
        let mut s = Complex::new(T::zero(), T::zero());
        for n in 0..=self.terms {
            let k = c::<T>((2 * n + 1) as f64);
            s = s + self.q_half[n] * (v * k).cos();
        }
        s * c::<T>(2.0)
    }

    fn theta34(&self, v: Complex<T>, alternate: bool) -> Complex<T> {
        let mut s = Complex::new(T::zero(), T::zero());
        for n in 1..=self.terms {
            let t = self.q_int[n] * (v * c::<T>((2 * n) as f64)).cos();
            s = if alternate && n % 2 == 1 { s - t } else { s + t };
        }
        s * c::<T>(2.0) + T::one()
    }

    fn theta3(&self, v: Complex<T>) -> Complex<T> {
        self.theta34(v, false)
    }

    fn theta4(&self, v: Complex<T>) -> Complex<T> {
        self.theta34(v, true)
    }

    fn eval_theta(&self, w: Complex<T>) -> (Complex<T>, Complex<T>) {
        let pi = T::PI();
        let v = w * pi;
        let t1 = self.theta1(v);
        let (t2, t3, t4) = (self.theta2(v), self.theta3(v), self.theta4(v));
        let r = self.theta23 * t4 * pi / t1;
        let wp = r * r - self.theta_sum4 * (pi * pi / c(3.0));
        let dwp = -(self.theta_prod * self.theta_prod) * t2 * t3 * t4 * (c::<T>(2.0) * pi * pi * pi) / (t1 * t1 * t1);
        (wp, dwp)
    }

    fn eval_sum(&self, w: Complex<T>) -> (Complex<T>, Complex<T>) {
        let pi = T::PI();
        let pi2 = pi * pi;
        let two_pi3 = c::<T>(2.0) * pi2 * pi;
        let row = |u: Complex<T>| {
            let (s, co) = ((u * pi).sin(), (u * pi).cos());
            let s2 = s * s;
            (Complex::new(pi2, T::zero()) / s2, -co * two_pi3 / (s2 * s))
        };
        let (mut wp, mut dwp) = row(w);
        for n in 1..=self.terms {
            let shift = self.tau_red * c::<T>(n as f64);
            let (a, da) = row(w - shift);
            let (b, db) = row(w + shift);
            wp = wp + a + b;
            dwp = dwp + da + db;
        }
        (wp - self.row_const - pi2 / c(3.0), dwp)
    }
}

/// `(g₂, g₃)` of `ℤ + τℤ` from `E₄, E₆` with `q = e^{2πiτ}`; `τ` should be reduced.
pub fn eisenstein_invariants<T: Real>(tau: Complex<T>, eps: T) -> (Complex<T>, Complex<T>) {
    let pi = T::PI();
    let q = (Complex::new(T::zero(), c::<T>(2.0) * pi) * tau).exp();
    let mut e4 = Complex::new(T::one(), T::zero());
    let mut e6 = Complex::new(T::one(), T::zero());
    let mut qn = q;
    for n in 1..400 {
        let nf = c::<T>(n as f64);
        let frac = qn / (Complex::new(T::one(), T::zero()) - qn);
        let t4 = frac * (nf * nf * nf * c(240.0));
        let t6 = frac * (nf * nf * nf * nf * nf * c(504.0));
        e4 = e4 + t4;
        e6 = e6 - t6;
        if n > 3 && t6.norm() < eps * c(1e-3) {
            break;
        }
        qn = qn * q;
    }
    let pi4 = pi * pi * pi * pi;
    (e4 * (pi4 * c(4.0) / c(3.0)), e6 * (pi4 * pi * pi * c(8.0) / c(27.0)))
}

/// `(g₂, g₃)` of `ℤ + τℤ`.
pub fn invariants<T: Real>(tau: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
    Ok(WpEvaluator::new(tau, Backend::Theta)?.invariants())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(tau: Complex<f64>, b: Backend) -> WpEvaluator<f64> {
        WpEvaluator::new(tau, b).unwrap()
    }

    #[test]
    fn square_and_hexagonal_symmetry() {
        let (g2, g3) = invariants(Complex::new(0.0, 1.0)).unwrap();
        assert!(g3.norm() < 1e-10 * g2.norm());
        let rho = Complex::new(0.5, 3f64.sqrt() / 2.0);
        let (g2, g3) = invariants(rho).unwrap();
        assert!(g2.norm() < 1e-10 * g3.norm());
    }

    #[test]
    fn known_square_lattice_value() {
        // g₂(ℤ + iℤ) = Γ(1/4)⁸ / (16π²)
        let gamma_quarter = 3.625_609_908_221_908_f64;
        let expect = gamma_quarter.powi(8) / (16.0 * std::f64::consts::PI.powi(2));
        let (g2, _) = invariants(Complex::new(0.0, 1.0)).unwrap();
        assert!((g2.re - expect).abs() < 1e-10 * expect, "{g2} vs {expect}");
    }

    #[test]
    fn pole_is_at_infinity() {
        let e = ev(Complex::new(0.0, 2f64.sqrt()), Backend::Theta);
        assert_eq!(e.eval(Complex::new(0.0, 0.0)), CurvePoint::AtInfinity);
        assert_eq!(e.eval(Complex::new(1.0, 2f64.sqrt())), CurvePoint::AtInfinity);
        assert!(e.wp(Complex::new(1e-3, 0.0)).unwrap().norm() > 1e5);
    }

    #[test]
    fn backends_agree_and_satisfy_ode() {
        for tau in [Complex::new(0.0, 2f64.sqrt()), Complex::new(0.3, 0.7), Complex::new(-2.4, 0.2)] {
            let a = ev(tau, Backend::Theta);
            let b = ev(tau, Backend::LatticeSum);
            for k in 0..20 {
                let z = Complex::new(0.13 * k as f64 - 1.1, 0.071 * k as f64 - 0.4);
                let (pa, da) = a.eval(z).finite().unwrap();
                let (pb, db) = b.eval(z).finite().unwrap();
                assert!((pa - pb).norm() < 1e-9 * (1.0 + pa.norm()), "tau={tau} z={z}: {pa} {pb}");
                assert!((da - db).norm() < 1e-9 * (1.0 + da.norm()));
                assert!(a.ode_residual(z).unwrap() < 1e-10);
                assert!(b.ode_residual(z).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let e: WpEvaluator<f32> = WpEvaluator::new(Complex::new(0.0, 1.5), Backend::Theta).unwrap();
        assert!(e.ode_residual(Complex::new(0.21, 0.33)).unwrap() < 1e-4);
    }

    #[test]
    fn fault_breaks_the_ode() {
        let e = ev(Complex::new(0.0, 1.0), Backend::Theta).with_fault(1e-6);
        assert!(e.ode_residual(Complex::new(0.2, 0.3)).unwrap() > 1e-8);
    }
}
