//! Closure of `exp_A(L)`: the smallest `Λ`-rational real subspace `T ⊇ L`,
//! and the alternating chain `L₀ ≤ T₀ ≤ L₁ ≤ … ≤ L_k`.
//!
//! In lattice coordinates `Λ = ℤ^{2g}`, so a real subspace is `Λ`-rational
//! iff it is cut out by rational covectors. Writing every basis vector of `L`
//! as `Σ_k v^{(k)} √k` with rational vectors `v^{(k)}`, a rational covector
//! annihilates `L` iff it annihilates every `v^{(k)}` (the `√k` are linearly
//! independent over `ℚ`). Hence `T = span_ℝ {v^{(k)}}`, computed exactly.

use std::collections::BTreeSet;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, Matrix};
use crate::multiquad::{format_complex, MultiQuad};
use crate::subspace::{ComplexSubspace, RealSubspace};
use crate::variety::ProductVariety;

/// Rational hull of a real subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct HullResult {
    /// `T`, with a rational RREF basis.
    pub t: RealSubspace,
    /// Rational covectors cutting `T` (RREF).
    pub codim_equations: Matrix<BigRational>,
    pub dim_t: usize,
}

/// Smallest `ℚ`-rational subspace containing the real subspace `v`.
pub fn rational_hull_real(v: &RealSubspace) -> HullResult {
    let n = v.ambient_dim();
    let mut rows: Matrix<BigRational> = Vec::new();
    for b in v.basis() {
        let keys: BTreeSet<u64> = b.iter().flat_map(|x| x.keys().collect::<Vec<_>>()).collect();
        for k in keys {
            rows.push(b.iter().map(|x| x.coefficient(k)).collect());
        }
    }
    let basis_q = linalg::row_basis(&rows);
    let codim_equations = linalg::null_space(&basis_q, n);
    let basis: Matrix<MultiQuad> = basis_q
        .iter()
        .map(|r| r.iter().cloned().map(MultiQuad::from_rational).collect())
        .collect();
    let t = RealSubspace::span(n, &basis);
    HullResult {
        dim_t: t.dim(),
        t,
        codim_equations,
    }
}

/// Rational hull of a complex subspace `L`, realified in lattice coordinates.
pub fn rational_hull(l: &ComplexSubspace, a: &ProductVariety) -> Result<HullResult> {
    Ok(rational_hull_real(&l.realify(a)?))
}

/// `T + iT`, the smallest complex subspace containing `T`.
pub fn complexification(t: &RealSubspace, a: &ProductVariety) -> Result<ComplexSubspace> {
    Ok(ComplexSubspace::span(a.g(), &t.complex_vectors(a)?))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChainMember {
    Complex(ComplexSubspace),
    Real(RealSubspace),
}

impl ChainMember {
    pub fn real_dim(&self) -> usize {
        match self {
            ChainMember::Complex(l) => l.real_dim(),
            ChainMember::Real(t) => t.dim(),
        }
    }

    pub fn label(&self, index: usize) -> String {
        match self {
            ChainMember::Complex(_) => format!("L{}", index / 2),
            ChainMember::Real(_) => format!("T{}", index / 2),
        }
    }
}

/// The chain `L = L₀ ≤ T₀ ≤ L₁ ≤ … ≤ L_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HullChain {
    pub chain: Vec<ChainMember>,
    pub k: usize,
    /// The chain stabilised at a proper `Λ`-rational complex subspace, the Lie
    /// algebra of an abelian subvariety containing `L`.
    pub non_free: bool,
}

impl HullChain {
    pub fn real_dims(&self) -> Vec<usize> {
        self.chain.iter().map(ChainMember::real_dim).collect()
    }

    /// Last complex member of the chain.
    pub fn top(&self) -> &ComplexSubspace {
        self.chain
            .iter()
            .rev()
            .find_map(|m| match m {
                ChainMember::Complex(l) => Some(l),
                ChainMember::Real(_) => None,
            })
            .expect("chain starts with L0")
    }
}

pub fn hull_chain(l: &ComplexSubspace, a: &ProductVariety) -> Result<HullChain> {
    let full = 2 * a.g();
    let mut chain = vec![ChainMember::Complex(l.clone())];
    let mut cur = l.clone();
    let mut k = 0;
    let mut non_free = false;
    // each step strictly increases the real dimension, so at most 2g steps
    while cur.real_dim() < full {
        let hull = rational_hull(&cur, a)?;
        if hull.dim_t == cur.real_dim() {
            non_free = true;
            break;
        }
        let next = complexification(&hull.t, a)?;
        let t_dim = hull.dim_t;
        chain.push(ChainMember::Real(hull.t));
        k += 1;
        let next_dim = next.real_dim();
        chain.push(ChainMember::Complex(next.clone()));
        if next_dim == t_dim && next_dim < full {
            // T is already complex and rational: fixed point below ℂ^g
            non_free = true;
            break;
        }
        cur = next;
    }
    Ok(HullChain { chain, k, non_free })
}

/// Report-friendly rendering of a hull chain.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ChainReport {
    pub label: String,
    pub kind: &'static str,
    pub real_dim: usize,
    pub basis: Vec<Vec<String>>,
}

pub fn chain_report(chain: &HullChain) -> Vec<ChainReport> {
    chain
        .chain
        .iter()
        .enumerate()
        .map(|(i, m)| match m {
            ChainMember::Complex(l) => ChainReport {
                label: m.label(i),
                kind: "complex",
                real_dim: l.real_dim(),
                basis: l
                    .basis()
                    .iter()
                    .map(|v| v.iter().map(format_complex).collect())
                    .collect(),
            },
            ChainMember::Real(t) => ChainReport {
                label: m.label(i),
                kind: "real",
                real_dim: t.dim(),
                basis: t
                    .basis()
                    .iter()
                    .map(|v| v.iter().map(ToString::to_string).collect())
                    .collect(),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiquad::{parse_complex, ComplexMQ};
    use crate::variety::EllipticFactor;
    use num_traits::One;

    fn variety(d1: u64, d2: u64) -> ProductVariety {
        ProductVariety::new(
            vec![
                EllipticFactor::imaginary(BigRational::one(), d1).unwrap(),
                EllipticFactor::imaginary(BigRational::one(), d2).unwrap(),
            ],
            true,
        )
        .unwrap()
    }

    fn line(a: &str, b: &str) -> ComplexSubspace {
        let v: Vec<ComplexMQ> = [a, b].iter().map(|s| parse_complex(s).unwrap()).collect();
        ComplexSubspace::new(2, vec![v]).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn rational_line_is_its_own_hull() {
        let a = variety(2, 5);
        let l = ComplexSubspace::coordinate(2, &[0]);
        let h = rational_hull(&l, &a).unwrap();
        assert_eq!(h.t, l.realify(&a).unwrap());
        assert_eq!(h.dim_t, 2);
    }

    #[test]
    fn diagonal_hull_is_equal_real_parts() {
        let a = variety(2, 5);
        let h = rational_hull(&line("1", "1"), &a).unwrap();
        assert_eq!(h.dim_t, 3);
        assert_eq!(h.codim_equations, vec![vec![q(1), q(0), q(-1), q(0)]]);
    }

    #[test]
    fn irrational_slope_over_square_lattices_fills_everything() {
        // a + c√2 = 0, b + d√2 = 0 has no rational solution besides 0
        let a = variety(1, 1);
        let h = rational_hull(&line("1", "sqrt(2)"), &a).unwrap();
        assert_eq!(h.dim_t, 4);
        assert!(h.codim_equations.is_empty());
    }

    #[test]
    fn complexification_examples() {
        let a = variety(2, 5);
        let h = rational_hull(&line("1", "1"), &a).unwrap();
        let l1 = complexification(&h.t, &a).unwrap();
        assert_eq!(l1.dim(), 2);
        // a complex subspace is its own complexification
        let l = ComplexSubspace::coordinate(2, &[1]);
        assert_eq!(complexification(&l.realify(&a).unwrap(), &a).unwrap(), l);
        // g = 1: the a-axis (real line) complexifies to ℂ
        let e = ProductVariety::new(vec![EllipticFactor::imaginary(BigRational::one(), 1).unwrap()], true)
            .unwrap();
        let axis = RealSubspace::span(2, &[vec![MultiQuad::one(), MultiQuad::from_int(0)]]);
        assert_eq!(complexification(&axis, &e).unwrap().dim(), 1);
    }

    #[test]
    fn chain_examples() {
        let a = variety(2, 5);
        let c = hull_chain(&line("1", "1"), &a).unwrap();
        assert_eq!(c.k, 1);
        assert_eq!(c.real_dims(), vec![2, 3, 4]);
        assert!(!c.non_free);

        let c = hull_chain(&ComplexSubspace::coordinate(2, &[0]), &a).unwrap();
        assert_eq!(c.k, 0);
        assert!(c.non_free);
        assert_eq!(c.real_dims(), vec![2]);

        let c = hull_chain(&ComplexSubspace::full(2), &a).unwrap();
        assert_eq!(c.k, 0);
        assert_eq!(c.chain.len(), 1);
        assert!(!c.non_free);
    }

    #[test]
    fn idempotent() {
        let a = variety(2, 5);
        let h = rational_hull(&line("1", "1"), &a).unwrap();
        assert_eq!(rational_hull_real(&h.t), h);
    }
}
