//! Certifier and solver for exponential-algebraic intersections
//! `exp_A(L) ∩ W` on products of elliptic curves.
//!
//! The exact layers (linear algebra, hulls, forms) are generic over
//! [`scalar::Field`]; the analytic layers over `num_traits::Float`.

pub mod error;
pub mod forms;
pub mod checker;
pub mod delta;
pub mod homology;
pub mod hull;
pub mod instance;
pub mod kronecker;
pub mod linalg;
pub mod multiquad;
pub mod pipeline;
pub mod scalar;
pub mod segre;
pub mod solver;
pub mod subspace;
pub mod variety;
pub mod weierstrass;

pub use error::{EacError, Result};
pub use multiquad::{ComplexMQ, MultiQuad};

/// Exact differential form in lattice coordinates.
pub type ExactForm = forms::ExteriorForm<MultiQuad>;
/// Floating-point differential form.
pub type FloatForm = forms::ExteriorForm<f64>;
/// Double-precision Weierstrass evaluator.
pub type Wp = weierstrass::WpEvaluator<f64>;
/// Single-precision Weierstrass evaluator.
pub type WpF32 = weierstrass::WpEvaluator<f32>;
