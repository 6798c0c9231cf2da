//! A problem `(A, L, W)` together with solver settings.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{EacError, Result};
use crate::segre::SegrePolynomial;
use crate::subspace::ComplexSubspace;
use crate::variety::ProductVariety;

#[derive(Clone, Debug, PartialEq)]
pub enum WKind {
    /// `W = {F = 0}` in the Segre image of `E₁ × E₂`.
    SegreHypersurface(SegrePolynomial),
    /// `W = A`.
    Whole,
    /// `W = {exp_A(z)}`.
    Point(Vec<Complex<f64>>),
}

impl WKind {
    pub fn name(&self) -> &'static str {
        match self {
            WKind::SegreHypersurface(_) => "segre-hypersurface",
            WKind::Whole => "whole",
            WKind::Point(_) => "point",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WDescriptor {
    pub kind: WKind,
    pub dim: usize,
    /// Fibre counts `(m, n)`, see [`crate::homology::class_of_hypersurface`].
    pub bidegree: Option<(u32, u32)>,
    /// User assertion that `W` lies in no translate of a proper factor
    /// subproduct and projects with maximal dimension.
    pub assert_free: Option<bool>,
}

impl WDescriptor {
    pub fn hypersurface(f: SegrePolynomial, bidegree: Option<(u32, u32)>) -> Self {
        Self {
            kind: WKind::SegreHypersurface(f),
            dim: 1,
            bidegree,
            assert_free: None,
        }
    }

    pub fn whole(g: usize) -> Self {
        Self {
            kind: WKind::Whole,
            dim: g,
            bidegree: None,
            assert_free: None,
        }
    }

    pub fn point(z: Vec<Complex<f64>>) -> Self {
        Self {
            kind: WKind::Point(z),
            dim: 0,
            bidegree: None,
            assert_free: None,
        }
    }

    pub fn polynomial(&self) -> Option<&SegrePolynomial> {
        match &self.kind {
            WKind::SegreHypersurface(f) => Some(f),
            _ => None,
        }
    }

    pub fn validate(&self, g: usize) -> Result<()> {
        let ok = match &self.kind {
            WKind::SegreHypersurface(_) => g == 2 && self.dim == 1,
            WKind::Whole => self.dim == g,
            WKind::Point(z) => self.dim == 0 && z.len() == g,
        };
        if !ok {
            return Err(EacError::InvalidInput(format!(
                "W of kind {} with dim {} is not supported for g = {g}",
                self.kind.name(),
                self.dim
            )));
        }
        if self.bidegree.is_some() && !matches!(self.kind, WKind::SegreHypersurface(_)) {
            return Err(EacError::InvalidInput("bidegree only applies to segre-hypersurface".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Grid points per side of each fundamental-domain cell.
    pub grid: usize,
    /// Wall-clock budget in seconds.
    pub budget_secs: f64,
    pub seed: u64,
    pub target_count: usize,
    pub max_cells: usize,
    /// Newton stops once `|F ∘ exp| <` this.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Seeds are grid local minima of `|F ∘ exp|` below this.
    pub coarse_threshold: f64,
    /// Solutions closer than this in `A` are identified.
    pub dedup_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            budget_secs: 60.0,
            seed: 0,
            target_count: 1,
            max_cells: 400,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            coarse_threshold: 1.0,
            dedup_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub variety: ProductVariety,
    pub l: ComplexSubspace,
    pub w: WDescriptor,
    pub solver: SolverConfig,
    /// Echoed user assertion; see the checker for how it is used.
    pub no_cm: bool,
}

impl Instance {
    pub fn new(name: impl Into<String>, variety: ProductVariety, l: ComplexSubspace, w: WDescriptor) -> Result<Self> {
        if l.g() != variety.g() {
            return Err(EacError::DimensionMismatch {
                expected: variety.g(),
                found: l.g(),
            });
        }
        w.validate(variety.g())?;
        Ok(Self {
            name: name.into(),
            variety,
            l,
            w,
            solver: SolverConfig::default(),
            no_cm: false,
        })
    }

    pub fn g(&self) -> usize {
        self.variety.g()
    }
}
