//! Elliptic factors, the product abelian variety `A = ∏ Eⱼ`, and the lattice
//! chart `zⱼ = aⱼ + bⱼ·τⱼ` in which `Λ = ℤ^{2g}`.

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, Zero};
use serde::Serialize;

use crate::error::{EacError, Result};
use crate::multiquad::{ComplexMQ, MultiQuad};

/// One factor `E = ℂ/(ℤ + τℤ)` with `τ = tau_re + i·tau_im`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticFactor {
    tau_re: BigRational,
    tau_im: MultiQuad,
    /// User assertion `End(E) = ℤ`.
    pub end_is_z: bool,
}

impl EllipticFactor {
    pub fn new(tau_re: BigRational, tau_im: MultiQuad, end_is_z: bool) -> Result<Self> {
        if tau_im.signum_exact() <= 0 {
            return Err(EacError::InvalidInput(format!(
                "Im(tau) must be positive, got {tau_im}"
            )));
        }
        Ok(Self {
            tau_re,
            tau_im,
            end_is_z,
        })
    }

    /// `τ = i·q·√d`, the shape used by the worked example lattices.
    pub fn imaginary(q: BigRational, d: u64) -> Result<Self> {
        Self::new(BigRational::zero(), MultiQuad::term(q, d), false)
    }

    pub fn tau_re(&self) -> &BigRational {
        &self.tau_re
    }

    pub fn tau_im(&self) -> &MultiQuad {
        &self.tau_im
    }

    pub fn tau_exact(&self) -> ComplexMQ {
        Complex::new(MultiQuad::from_rational(self.tau_re.clone()), self.tau_im.clone())
    }

    pub fn tau<T: Float>(&self) -> Complex<T> {
        let re = num_traits::ToPrimitive::to_f64(&self.tau_re).unwrap_or(f64::NAN);
        Complex::new(
            T::from(re).unwrap(),
            T::from(self.tau_im.to_f64()).unwrap(),
        )
    }
}

/// `A = E₁ × … × E_g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductVariety {
    factors: Vec<EllipticFactor>,
    /// User assertion that the factors are pairwise non-isogenous.
    pub pairwise_nonisogenous: bool,
}

/// Serializable summary of `A` for reports.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VarietySummary {
    pub g: usize,
    pub taus: Vec<String>,
    pub covolume: f64,
    pub pairwise_nonisogenous: bool,
    pub end_is_z: Vec<bool>,
}

impl ProductVariety {
    pub fn new(factors: Vec<EllipticFactor>, pairwise_nonisogenous: bool) -> Result<Self> {
        if factors.is_empty() {
            return Err(EacError::InvalidInput("A needs at least one factor".into()));
        }
        Ok(Self {
            factors,
            pairwise_nonisogenous,
        })
    }

    pub fn g(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[EllipticFactor] {
        &self.factors
    }

    pub fn factor(&self, j: usize) -> &EllipticFactor {
        &self.factors[j]
    }

    /// Euclidean covolume of `Λ ⊂ ℂ^g`, `∏ Im τⱼ`. Lattice coordinates have covolume 1.
    pub fn covolume(&self) -> f64 {
        self.factors.iter().map(|f| f.tau_im.to_f64()).product()
    }

    pub fn summary(&self) -> VarietySummary {
        VarietySummary {
            g: self.g(),
            taus: self
                .factors
                .iter()
                .map(|f| crate::multiquad::format_complex(&f.tau_exact()))
                .collect(),
            covolume: self.covolume(),
            pairwise_nonisogenous: self.pairwise_nonisogenous,
            end_is_z: self.factors.iter().map(|f| f.end_is_z).collect(),
        }
    }

    /// Exact `(a₁, b₁, …, a_g, b_g)` of `z ∈ ℂ^g`.
    pub fn to_lattice_coords_exact(&self, z: &[ComplexMQ]) -> Result<Vec<MultiQuad>> {
        self.check_len(z.len())?;
        let mut out = Vec::with_capacity(2 * self.g());
        for (f, zj) in self.factors.iter().zip(z) {
            let b = zj.im.checked_div(&f.tau_im)?;
            let a = &zj.re - &b.scale(&f.tau_re);
            out.push(a);
            out.push(b);
        }
        Ok(out)
    }

    pub fn from_lattice_coords_exact(&self, x: &[MultiQuad]) -> Result<Vec<ComplexMQ>> {
        if x.len() != 2 * self.g() {
            return Err(EacError::DimensionMismatch {
                expected: 2 * self.g(),
                found: x.len(),
            });
        }
        Ok(self
            .factors
            .iter()
            .zip(x.chunks(2))
            .map(|(f, ab)| Complex::new(&ab[0] + &ab[1].scale(&f.tau_re), &ab[1] * &f.tau_im))
            .collect())
    }

    pub fn to_lattice_coords<T: Float>(&self, z: &[Complex<T>]) -> Vec<T> {
        let mut out = Vec::with_capacity(2 * self.g());
        for (f, zj) in self.factors.iter().zip(z) {
            let tau: Complex<T> = f.tau();
            let b = zj.im / tau.im;
            out.push(zj.re - b * tau.re);
            out.push(b);
        }
        out
    }

    pub fn from_lattice_coords<T: Float>(&self, x: &[T]) -> Vec<Complex<T>> {
        self.factors
            .iter()
            .zip(x.chunks(2))
            .map(|(f, ab)| Complex::new(ab[0], T::zero()) + f.tau::<T>() * ab[1])
            .collect()
    }

    /// Representative of `z mod Λ` with lattice coordinates in `[-1/2, 1/2)`,
    /// plus the integer lattice shift that was subtracted.
    pub fn reduce<T: Float>(&self, z: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<i64>) {
        let x = self.to_lattice_coords(z);
        let shift: Vec<i64> = x.iter().map(|v| v.round().to_i64().unwrap_or(0)).collect();
        let red: Vec<T> = x
            .iter()
            .zip(&shift)
            .map(|(v, s)| *v - T::from(*s).unwrap())
            .collect();
        (self.from_lattice_coords(&red), shift)
    }

    /// Distance between the images of `z` and `w` in `A`.
    pub fn distance_in_a<T: Float>(&self, z: &[Complex<T>], w: &[Complex<T>]) -> T {
        let diff: Vec<Complex<T>> = z.iter().zip(w).map(|(a, b)| *a - *b).collect();
        let (red, _) = self.reduce(&diff);
        red.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.g() {
            return Err(EacError::DimensionMismatch {
                expected: self.g(),
                found: n,
            });
        }
        Ok(())
    }
}
