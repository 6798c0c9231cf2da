//! Translation-invariant differential forms on `A` and rational homology
//! classes, both in the lattice basis `da₁, db₁, …, da_g, db_g`.
//!
//! Index `2j` is `daⱼ₊₁` and `2j+1` is `dbⱼ₊₁`. Keys are strictly increasing
//! index lists, so antisymmetry is structural.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{EacError, Result};
use crate::scalar::{Field, RealScalar};

pub type Key = Vec<usize>;

/// Sign of the permutation sorting the concatenation `a ++ b` (both sorted,
/// disjoint): `(-1)^{#inversions}`.
fn merge_sign(a: &[usize], b: &[usize]) -> i32 {
    let mut inversions = 0usize;
    for x in a {
        inversions += b.iter().filter(|y| *y < x).count();
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Homogeneous form of fixed degree on `ℝ^n` (`n = 2g`).
#[derive(Clone, PartialEq)]
pub struct ExteriorForm<S> {
    n: usize,
    degree: usize,
    coeffs: BTreeMap<Key, S>,
}

impl<S: Field> ExteriorForm<S> {
    pub fn zero(n: usize, degree: usize) -> Self {
        Self {
            n,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant 0-form `1`.
    pub fn one(n: usize) -> Self {
        let mut f = Self::zero(n, 0);
        f.coeffs.insert(vec![], S::one());
        f
    }

    /// Basic form `dx_{i₁} ∧ … ∧ dx_{i_k}` for an arbitrary index order.
    pub fn basic(n: usize, indices: &[usize]) -> Self {
        let mut f = Self::zero(n, indices.len());
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return f;
        }
        // sign of the sorting permutation
        let mut inv = 0;
        for i in 0..indices.len() {
            for j in i + 1..indices.len() {
                if indices[i] > indices[j] {
                    inv += 1;
                }
            }
        }
        let c = if inv % 2 == 0 { S::one() } else { -S::one() };
        f.coeffs.insert(sorted, c);
        f
    }

    /// The 1-form `Σ cᵢ dxᵢ`.
    pub fn covector(c: &[S]) -> Self {
        let mut f = Self::zero(c.len(), 1);
        for (i, x) in c.iter().enumerate() {
            if !x.is_zero() {
                f.coeffs.insert(vec![i], x.clone());
            }
        }
        f
    }

    /// `da₁∧db₁∧…∧da_g∧db_g`.
    pub fn volume(n: usize) -> Self {
        Self::basic(n, &(0..n).collect::<Vec<_>>())
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, key: &[usize]) -> S {
        self.coeffs.get(key).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&Key, &S)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(Field::is_negligible)
    }

    pub fn set(&mut self, key: Key, c: S) {
        debug_assert_eq!(key.len(), self.degree);
        if c.is_zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, c);
        }
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "forms on different spaces");
        let mut out = Self::zero(self.n, self.degree + other.degree);
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &other.coeffs {
                if ka.iter().any(|i| kb.contains(i)) {
                    continue;
                }
                let mut key: Key = ka.iter().chain(kb).copied().collect();
                key.sort_unstable();
                let mut c = ca.clone() * cb.clone();
                if merge_sign(ka, kb) < 0 {
                    c = -c;
                }
                let entry = out.coeffs.entry(key.clone()).or_insert_with(S::zero);
                *entry = entry.clone() + c;
                if entry.is_zero() {
                    out.coeffs.remove(&key);
                }
            }
        }
        out
    }

    /// Wedge of the 1-forms given by the rows of `covectors` (the 0-form `1`
    /// for an empty list).
    pub fn wedge_covectors(n: usize, covectors: &[Vec<S>]) -> Self {
        covectors
            .iter()
            .fold(Self::one(n), |acc, c| acc.wedge(&Self::covector(c)))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        for (k, c) in &self.coeffs {
            let v = c.clone() * s.clone();
            if !v.is_zero() {
                out.coeffs.insert(k.clone(), v);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree || self.n != other.n {
            return Err(EacError::DimensionMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            let v = out.coeff(k) + c.clone();
            out.set(k.clone(), v);
        }
        Ok(out)
    }

    /// First nonzero coefficient in lexicographic key order.
    pub fn leading(&self) -> Option<(&Key, &S)> {
        self.coeffs.iter().find(|(_, c)| !c.is_negligible())
    }

    /// Rescaled so that the leading coefficient is 1.
    pub fn normalized(&self) -> Self {
        match self.leading() {
            Some((_, c)) => self.scale(&(S::one() / c.clone())),
            None => self.clone(),
        }
    }

    /// `∫_A α` for a top-degree form: lattice coordinates have covolume 1,
    /// so this is the coefficient of the volume form.
    pub fn integrate_top(&self) -> Result<S> {
        if self.degree != self.n {
            return Err(EacError::DimensionMismatch {
                expected: self.n,
                found: self.degree,
            });
        }
        Ok(self.coeff(&(0..self.n).collect::<Vec<_>>()))
    }

    /// Scalar `a` with `other = a · self`, if the two forms are proportional.
    pub fn proportionality(&self, other: &Self) -> Option<S> {
        if self.degree != other.degree {
            return None;
        }
        let (k, c) = self.leading()?;
        let a = other.coeff(k) / c.clone();
        let diff = other.add(&self.scale(&-a.clone())).ok()?;
        diff.is_zero().then_some(a)
    }

    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> ExteriorForm<T> {
        let mut out = ExteriorForm::zero(self.n, self.degree);
        for (k, c) in &self.coeffs {
            out.set(k.clone(), f(c));
        }
        out
    }
}

impl<S: RealScalar> ExteriorForm<S> {
    pub fn to_f64(&self) -> ExteriorForm<f64> {
        self.map(RealScalar::to_f64)
    }
}

fn basis_name(i: usize) -> String {
    let ab = if i.is_multiple_of(2) { "da" } else { "db" };
    format!("{ab}{}", i / 2 + 1)
}

impl<S: Field + fmt::Display> fmt::Display for ExteriorForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let names: Vec<String> = k.iter().map(|&i| basis_name(i)).collect();
                if k.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", names.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<S: Field> fmt::Debug for ExteriorForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExteriorForm")
            .field("degree", &self.degree)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

/// Rational homology class in `H_k(A, ℚ) = Λ^k(Λ ⊗ ℚ)`, in the basis of
/// coordinate subtori `e_{i₁} ∧ … ∧ e_{i_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomologyClass {
    n: usize,
    degree: usize,
    coeffs: BTreeMap<Key, BigRational>,
}

impl HomologyClass {
    pub fn zero(n: usize, degree: usize) -> Self {
        Self {
            n,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// Class of the coordinate subtorus spanned by the given sorted indices.
    pub fn basic(n: usize, key: &[usize]) -> Self {
        let mut c = Self::zero(n, key.len());
        c.coeffs.insert(key.to_vec(), BigRational::one());
        c
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, key: &[usize]) -> BigRational {
        self.coeffs.get(key).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_scaled(&mut self, key: &[usize], c: BigRational) {
        let v = self.coeff(key) + c;
        if v.is_zero() {
            self.coeffs.remove(key);
        } else {
            self.coeffs.insert(key.to_vec(), v);
        }
    }

    /// `∫_C ω` for a form of the same degree.
    pub fn integrate<S: RealScalar>(&self, form: &ExteriorForm<S>) -> Result<S> {
        if form.degree() != self.degree {
            return Err(EacError::DimensionMismatch {
                expected: self.degree,
                found: form.degree(),
            });
        }
        Ok(self.coeffs.iter().fold(S::zero(), |acc, (k, c)| {
            acc + S::from_rational(c) * form.coeff(k)
        }))
    }

    /// Poincaré dual `η_C` of degree `n − k`, characterised by
    /// `∫_A η_C ∧ α = ∫_C α` for every `k`-form `α`.
    pub fn poincare_dual<S: RealScalar>(&self) -> ExteriorForm<S> {
        let mut out = ExteriorForm::zero(self.n, self.n - self.degree);
        for (k, c) in &self.coeffs {
            let comp: Key = (0..self.n).filter(|i| !k.contains(i)).collect();
            // dx_comp ∧ dx_k = sign · vol
            let sign = merge_sign(&comp, k);
            let v = S::from_rational(c);
            out.set(comp, if sign > 0 { v } else { -v });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiquad::MultiQuad;

    type F = ExteriorForm<MultiQuad>;

    #[test]
    fn top_integrals() {
        assert_eq!(F::volume(4).integrate_top().unwrap(), MultiQuad::one());
        let swapped = F::basic(4, &[1, 0, 2, 3]);
        assert_eq!(swapped.integrate_top().unwrap(), MultiQuad::from_int(-1));
        assert_eq!(F::zero(4, 4).integrate_top().unwrap(), MultiQuad::zero());
        assert!(F::volume(4).wedge(&F::one(4)).integrate_top().is_ok());
        assert!(F::basic(4, &[0, 1]).integrate_top().is_err());
    }

    #[test]
    fn wedge_graded_commutativity_on_basics() {
        let a = F::basic(6, &[0, 3]);
        let b = F::basic(6, &[1]);
        let c = F::basic(6, &[2, 4, 5]);
        // degrees 2 and 1: commute
        assert_eq!(a.wedge(&b), b.wedge(&a));
        // degrees 1 and 3, 1 and 1: anticommute
        assert_eq!(b.wedge(&c), c.wedge(&b).scale(&MultiQuad::from_int(-1)));
        let d = F::basic(6, &[4]);
        assert_eq!(b.wedge(&d), d.wedge(&b).scale(&MultiQuad::from_int(-1)));
        assert!(b.wedge(&b).is_zero());
    }

    #[test]
    fn dual_pairing_is_perfect_on_basis() {
        let n = 4;
        for k in 0..=n {
            let keys: Vec<Key> = subsets(n, k);
            for ki in &keys {
                let pd: F = HomologyClass::basic(n, ki).poincare_dual();
                for kj in &keys {
                    let alpha = F::basic(n, kj);
                    let lhs = pd.wedge(&alpha).integrate_top().unwrap();
                    let expect = MultiQuad::from_int((ki == kj) as i64);
                    assert_eq!(lhs, expect, "k={k} {ki:?} {kj:?}");
                }
            }
        }
    }

    pub(crate) fn subsets(n: usize, k: usize) -> Vec<Key> {
        fn go(start: usize, n: usize, k: usize, cur: &mut Key, out: &mut Vec<Key>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, k, &mut vec![], &mut out);
        out
    }
}
