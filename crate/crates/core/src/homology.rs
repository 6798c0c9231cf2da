//! Forms attached to subspaces, the class of `W`, and the intersection-number
//! certificate `∫_A η_W ∧ ω_T ∧ ω_{T'}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{EacError, Result};
use crate::forms::{ExteriorForm, HomologyClass};
use crate::hull::rational_hull;
use crate::linalg::{self, Matrix};
use crate::multiquad::MultiQuad;
use crate::scalar::Field;
use crate::subspace::{ComplexSubspace, RealSubspace};
use crate::variety::ProductVariety;

/// Wedge of the given defining covectors, without normalisation.
pub fn form_of_equations<S: Field>(n: usize, equations: &[Vec<S>]) -> ExteriorForm<S> {
    ExteriorForm::wedge_covectors(n, equations)
}

/// `ω_T`: wedge of the RREF equations of `T`, leading coefficient 1.
/// `ℝ^{2g}` itself gives the 0-form `1`.
pub fn form_of_subspace(t: &RealSubspace) -> ExteriorForm<MultiQuad> {
    form_of_equations(t.ambient_dim(), &t.equations()).normalized()
}

/// `ω_{R_L} ∧ ω_{I_L}`, the real form `ω_L^hol ∧ conj(ω_L^hol)` up to the
/// factor `−2i`. Not normalised.
pub fn holomorphic_form_realized(l: &ComplexSubspace, a: &ProductVariety) -> Result<ExteriorForm<MultiQuad>> {
    let (re, im) = l.real_equations(a)?;
    let n = 2 * a.g();
    Ok(form_of_equations(n, &re).wedge(&form_of_equations(n, &im)))
}

/// Class of a curve `W ⊂ E₁ × E₂` with `m` roots in `z₁` on each fibre
/// `E₁ × {pt}` and `n` roots in `z₂` on each fibre `{pt} × E₂`:
/// `[W] = m·[{pt}×E₂] + n·[E₁×{pt}]`, dual to `m·da₁∧db₁ + n·da₂∧db₂`.
pub fn class_of_hypersurface(m: u64, n: u64) -> Result<HomologyClass> {
    if m == 0 && n == 0 {
        return Err(EacError::TrivialClass);
    }
    let mut c = HomologyClass::zero(4, 2);
    c.add_scaled(&[2, 3], BigRational::from_integer(BigInt::from(m)));
    c.add_scaled(&[0, 1], BigRational::from_integer(BigInt::from(n)));
    Ok(c)
}

/// Dual form of `W = A` (the constant 1).
pub fn class_of_whole(g: usize) -> HomologyClass {
    HomologyClass::basic(2 * g, &(0..2 * g).collect::<Vec<_>>())
}

/// Dual form of a point (the volume form).
pub fn class_of_point(g: usize) -> HomologyClass {
    HomologyClass::basic(2 * g, &[])
}

/// Outcome of [`eac_certificate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// `∫_A η_W ∧ ω_T ∧ ω_{T'}`.
    pub value: MultiQuad,
    /// `∫_A η_W ∧ ω_{R_L} ∧ ω_{I_L}`.
    pub cross_check: MultiQuad,
    /// `ω_T ∧ ω_{T'} = ratio · ω_{R_L} ∧ ω_{I_L}`.
    pub ratio: MultiQuad,
    pub omega_t: ExteriorForm<MultiQuad>,
    pub omega_t_prime: ExteriorForm<MultiQuad>,
    /// Covectors cutting `T'`.
    pub t_prime_equations: Matrix<MultiQuad>,
    pub dim_t: usize,
}

impl Certificate {
    pub fn is_nonzero(&self) -> bool {
        !self.value.is_zero()
    }
}

/// Reduces `row` modulo an RREF system (clears its pivot columns).
fn reduce_mod_rref(row: &[MultiQuad], rref: &[Vec<MultiQuad>], pivots: &[usize]) -> Vec<MultiQuad> {
    let mut r = row.to_vec();
    for (e, &p) in rref.iter().zip(pivots) {
        let f = r[p].clone();
        if f.is_zero() {
            continue;
        }
        for (x, y) in r.iter_mut().zip(e) {
            *x = &*x - &(&f * y);
        }
    }
    r
}

/// Builds `T'` from the real and imaginary equations of `L` that do not
/// already vanish on `T`, and evaluates the certificate.
pub fn eac_certificate(eta_w: &ExteriorForm<MultiQuad>, l: &ComplexSubspace, a: &ProductVariety) -> Result<Certificate> {
    let n = 2 * a.g();
    if eta_w.ambient_dim() != n {
        return Err(EacError::DimensionMismatch {
            expected: n,
            found: eta_w.ambient_dim(),
        });
    }
    let hull = rational_hull(l, a)?;
    let mut e_t = hull.t.equations();
    let pivots = linalg::rref(&mut e_t);
    let omega_t = form_of_equations(n, &e_t).normalized();

    let (re, im) = l.real_equations(a)?;
    let mut kept: Matrix<MultiQuad> = e_t.clone();
    let mut t_prime: Matrix<MultiQuad> = Vec::new();
    for row in re.iter().chain(&im) {
        let reduced = reduce_mod_rref(row, &e_t, &pivots);
        if reduced.iter().all(Zero::is_zero) {
            continue;
        }
        kept.push(reduced.clone());
        if linalg::rank(&kept) == kept.len() {
            t_prime.push(reduced);
        } else {
            kept.pop();
        }
    }
    // T ∩ T' = L, checked exactly
    let cut = RealSubspace::from_equations(n, &kept);
    if cut != l.realify(a)? {
        return Err(EacError::ComplementFailure(format!(
            "T ∩ T' has real dimension {}, expected {}",
            cut.dim(),
            2 * l.dim()
        )));
    }
    let omega_t_prime = form_of_equations(n, &t_prime);
    let degree = eta_w.degree() + omega_t.degree() + omega_t_prime.degree();
    if degree != n {
        return Err(EacError::DimensionMismatch {
            expected: n,
            found: degree,
        });
    }
    let cut_form = omega_t.wedge(&omega_t_prime);
    let value = eta_w.wedge(&cut_form).integrate_top()?;

    let hol = holomorphic_form_realized(l, a)?;
    let cross_check = eta_w.wedge(&hol).integrate_top()?;
    let ratio = hol
        .proportionality(&cut_form)
        .filter(|r| !r.is_zero())
        .ok_or_else(|| EacError::ComplementFailure("ω_T ∧ ω_T' is not proportional to ω_R ∧ ω_I".into()))?;
    debug_assert_eq!(value, &ratio * &cross_check);

    Ok(Certificate {
        value,
        cross_check,
        ratio,
        omega_t,
        omega_t_prime,
        t_prime_equations: t_prime,
        dim_t: hull.dim_t,
    })
}

/// Closed form of the certificate for a line `L = {ℓ₁z₁ + ℓ₂z₂ = 0}` in
/// `E₁ × E₂` with purely imaginary `τⱼ = i sⱼ`, used as an oracle.
pub fn line_certificate_closed_form(m: f64, n: f64, l1: num_complex::Complex<f64>, l2: num_complex::Complex<f64>, s1: f64, s2: f64) -> f64 {
    m * l2.norm_sqr() * s2 + n * l1.norm_sqr() * s1
}
