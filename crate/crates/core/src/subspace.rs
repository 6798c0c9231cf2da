//! Exact linear subspaces: complex subspaces of `ℂ^g` (standard coordinates)
//! and real subspaces of `ℝ^{2g}` (lattice coordinates).
//!
//! Bases are stored in reduced row echelon form, so two subspaces are equal
//! exactly when their stored bases are equal.

use num_complex::Complex;

use crate::error::{EacError, Result};
use crate::linalg::{self, Matrix};
use crate::multiquad::{complex_to_f64, ComplexMQ, MultiQuad};
use crate::variety::ProductVariety;

fn c_zero() -> ComplexMQ {
    Complex::new(MultiQuad::zero(), MultiQuad::zero())
}

fn c_real(x: MultiQuad) -> ComplexMQ {
    Complex::new(x, MultiQuad::zero())
}

/// Complex linear subspace `L ≤ ℂ^g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSubspace {
    g: usize,
    basis: Matrix<ComplexMQ>,
}

/// Real linear subspace `T ≤ ℝ^{2g}` in lattice coordinates `(a₁, b₁, …)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSubspace {
    n: usize,
    basis: Matrix<MultiQuad>,
}

impl ComplexSubspace {
    /// Subspace with the given basis vectors; fails if they are dependent.
    pub fn new(g: usize, vectors: Vec<Vec<ComplexMQ>>) -> Result<Self> {
        for v in &vectors {
            if v.len() != g {
                return Err(EacError::DimensionMismatch {
                    expected: g,
                    found: v.len(),
                });
            }
        }
        let r = linalg::rank(&vectors);
        if r != vectors.len() {
            return Err(EacError::InvalidInput(format!(
                "basis of L is linearly dependent (rank {r} < {})",
                vectors.len()
            )));
        }
        Ok(Self::span(g, &vectors))
    }

    /// Span of an arbitrary generating set.
    pub fn span(g: usize, vectors: &[Vec<ComplexMQ>]) -> Self {
        Self {
            g,
            basis: linalg::row_basis(vectors),
        }
    }

    pub fn zero(g: usize) -> Self {
        Self { g, basis: vec![] }
    }

    pub fn full(g: usize) -> Self {
        let basis = (0..g)
            .map(|i| {
                (0..g)
                    .map(|j| if i == j { c_real(MultiQuad::one()) } else { c_zero() })
                    .collect()
            })
            .collect();
        Self { g, basis }
    }

    /// `LB` for `B = ∏_{j∈S} Eⱼ`: vectors supported on the coordinates in `S`.
    pub fn coordinate(g: usize, subset: &[usize]) -> Self {
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        let basis = s
            .iter()
            .map(|&i| {
                (0..g)
                    .map(|j| if i == j { c_real(MultiQuad::one()) } else { c_zero() })
                    .collect()
            })
            .collect();
        Self { g, basis }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn real_dim(&self) -> usize {
        2 * self.dim()
    }

    pub fn basis(&self) -> &[Vec<ComplexMQ>] {
        &self.basis
    }

    pub fn basis_f64(&self) -> Vec<Vec<Complex<f64>>> {
        self.basis
            .iter()
            .map(|v| v.iter().map(complex_to_f64).collect())
            .collect()
    }

    /// Complex covectors `ℓ` (RREF) with `Σ ℓⱼ vⱼ = 0` on `L`.
    pub fn equations(&self) -> Matrix<ComplexMQ> {
        linalg::annihilator(&self.basis, self.g)
    }

    pub fn contains_vector(&self, v: &[ComplexMQ]) -> bool {
        linalg::in_span(&self.basis, v)
    }

    pub fn contains(&self, other: &ComplexSubspace) -> bool {
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    /// `L` as a real subspace of `ℝ^{2g}` in lattice coordinates, spanned by
    /// the images of `v` and `i·v` for each basis vector `v`.
    pub fn realify(&self, a: &ProductVariety) -> Result<RealSubspace> {
        self.check_g(a)?;
        let i = Complex::new(MultiQuad::zero(), MultiQuad::one());
        let mut vs = Vec::with_capacity(2 * self.dim());
        for v in &self.basis {
            vs.push(a.to_lattice_coords_exact(v)?);
            let iv: Vec<ComplexMQ> = v.iter().map(|x| x.clone() * i.clone()).collect();
            vs.push(a.to_lattice_coords_exact(&iv)?);
        }
        Ok(RealSubspace::span(2 * self.g, &vs))
    }

    /// Real equations of `L` in lattice coordinates: the real parts of the
    /// complex equations (cutting `R_L`) followed by the imaginary parts
    /// (cutting `I_L`).
    pub fn real_equations(&self, a: &ProductVariety) -> Result<(Matrix<MultiQuad>, Matrix<MultiQuad>)> {
        self.check_g(a)?;
        let eqs = self.equations();
        let mut re_rows = Vec::with_capacity(eqs.len());
        let mut im_rows = Vec::with_capacity(eqs.len());
        for l in &eqs {
            let mut re = Vec::with_capacity(2 * self.g);
            let mut im = Vec::with_capacity(2 * self.g);
            for (lj, f) in l.iter().zip(a.factors()) {
                // ℓⱼ zⱼ = ℓⱼ aⱼ + ℓⱼ τⱼ bⱼ
                let lt = lj.clone() * f.tau_exact();
                re.push(lj.re.clone());
                re.push(lt.re);
                im.push(lj.im.clone());
                im.push(lt.im);
            }
            re_rows.push(re);
            im_rows.push(im);
        }
        Ok((re_rows, im_rows))
    }

    /// Image under the projection deleting the coordinates in `subset`
    /// (the quotient `ℂ^g → ℂ^g / LB`).
    pub fn project_out(&self, subset: &[usize]) -> ComplexSubspace {
        let keep: Vec<usize> = (0..self.g).filter(|j| !subset.contains(j)).collect();
        let vs: Vec<Vec<ComplexMQ>> = self
            .basis
            .iter()
            .map(|v| keep.iter().map(|&j| v[j].clone()).collect())
            .collect();
        ComplexSubspace::span(keep.len(), &vs)
    }

    /// `L ∩ {c·z = 0}`.
    pub fn intersect_hyperplane(&self, c: &[ComplexMQ]) -> Result<ComplexSubspace> {
        if c.len() != self.g {
            return Err(EacError::DimensionMismatch {
                expected: self.g,
                found: c.len(),
            });
        }
        // coefficients x with Σ xₖ (c·vₖ) = 0
        let row: Vec<ComplexMQ> = self.basis.iter().map(|v| linalg::dot(c, v)).collect();
        let kernel = linalg::null_space(&[row], self.dim());
        let vs: Vec<Vec<ComplexMQ>> = kernel
            .iter()
            .map(|x| {
                (0..self.g)
                    .map(|j| {
                        x.iter()
                            .zip(&self.basis)
                            .fold(c_zero(), |acc, (xk, v)| acc + xk.clone() * v[j].clone())
                    })
                    .collect()
            })
            .collect();
        Ok(ComplexSubspace::span(self.g, &vs))
    }

    fn check_g(&self, a: &ProductVariety) -> Result<()> {
        if a.g() != self.g {
            return Err(EacError::DimensionMismatch {
                expected: a.g(),
                found: self.g,
            });
        }
        Ok(())
    }
}

impl RealSubspace {
    pub fn span(n: usize, vectors: &[Vec<MultiQuad>]) -> Self {
        Self {
            n,
            basis: linalg::row_basis(vectors),
        }
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| (0..n).map(|j| MultiQuad::from_int((i == j) as i64)).collect())
            .collect();
        Self { n, basis }
    }

    /// Subspace cut out by the given covectors.
    pub fn from_equations(n: usize, equations: &[Vec<MultiQuad>]) -> Self {
        Self {
            n,
            basis: linalg::null_space(equations, n),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.n - self.dim()
    }

    pub fn basis(&self) -> &[Vec<MultiQuad>] {
        &self.basis
    }

    /// Covectors (RREF) vanishing on the subspace.
    pub fn equations(&self) -> Matrix<MultiQuad> {
        linalg::annihilator(&self.basis, self.n)
    }

    pub fn contains_vector(&self, v: &[MultiQuad]) -> bool {
        linalg::in_span(&self.basis, v)
    }

    pub fn contains(&self, other: &RealSubspace) -> bool {
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    /// Every basis entry is rational (the subspace is `Λ`-rational).
    pub fn is_rational(&self) -> bool {
        self.basis.iter().flatten().all(MultiQuad::is_rational)
    }

    pub fn intersect(&self, other: &RealSubspace) -> RealSubspace {
        let mut eqs = self.equations();
        eqs.extend(other.equations());
        RealSubspace::from_equations(self.n, &eqs)
    }

    /// Basis vectors as points of `ℂ^g`.
    pub fn complex_vectors(&self, a: &ProductVariety) -> Result<Vec<Vec<ComplexMQ>>> {
        self.basis
            .iter()
            .map(|v| a.from_lattice_coords_exact(v))
            .collect()
    }
}
