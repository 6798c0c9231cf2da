//! Instance file format (JSON).

use std::path::Path;

use eac_core::instance::{Instance, SolverConfig, WDescriptor};
use eac_core::multiquad::parse_complex;
use eac_core::segre::{Monomial, SegrePolynomial};
use eac_core::subspace::ComplexSubspace;
use eac_core::variety::{EllipticFactor, ProductVariety};
use eac_core::MultiQuad;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

fn field(field: impl Into<String>, message: impl ToString) -> SchemaError {
    SchemaError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TauIm {
    /// Squarefree radicand.
    pub d: u64,
    /// Rational multiplier, `Im τ = q·√d`.
    pub q: String,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub tau_re: String,
    pub tau_im: TauIm,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[serde(default)]
    pub pairwise_nonisogenous: bool,
    #[serde(default)]
    pub no_cm: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSpec {
    /// Exponents of `Z₀ … Z₈`.
    pub monomial: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WSpec {
    pub kind: String,
    #[serde(default)]
    pub coeffs: Vec<CoeffSpec>,
    pub dim: usize,
    #[serde(default)]
    pub bidegree: Option<[u32; 2]>,
    #[serde(default)]
    pub assert_free: Option<bool>,
    /// For `kind = "point"`: `[re, im]` per coordinate.
    #[serde(default)]
    pub point: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub grid: Option<usize>,
    pub budget_secs: Option<f64>,
    pub seed: Option<u64>,
    pub target_count: Option<usize>,
    pub max_cells: Option<usize>,
    pub newton_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
    pub coarse_threshold: Option<f64>,
    pub dedup_tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub name: Option<String>,
    pub factors: Vec<FactorSpec>,
    #[serde(default)]
    pub flags: Flags,
    /// Basis vectors of `L`, one list of `g` complex literals each.
    #[serde(rename = "L")]
    pub l: Vec<Vec<String>>,
    #[serde(rename = "W")]
    pub w: WSpec,
    #[serde(default)]
    pub solver: SolverSpec,
}

/// Parsed instance with the SHA-256 of the file bytes.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub instance: Instance,
    pub file: InstanceFile,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<Loaded, SchemaError> {
    let bytes = std::fs::read(path).map_err(|source| SchemaError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let default_name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    parse_bytes(&bytes, default_name)
}

pub fn parse_bytes(bytes: &[u8], default_name: Option<String>) -> Result<Loaded, SchemaError> {
    let file: InstanceFile = serde_json::from_slice(bytes).map_err(|e| SchemaError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let instance = build(&file, default_name)?;
    Ok(Loaded {
        instance,
        file,
        sha256: hex::encode(Sha256::digest(bytes)),
    })
}

fn rational(s: &str, name: &str) -> Result<num_rational::BigRational, SchemaError> {
    let q: MultiQuad = s.parse().map_err(|e| field(name, e))?;
    q.as_rational().ok_or_else(|| field(name, format!("{s:?} is not rational")))
}

fn is_squarefree(d: u64) -> bool {
    d >= 1 && (2..).take_while(|p: &u64| p * p <= d).all(|p| !d.is_multiple_of(p * p))
}

pub fn build(file: &InstanceFile, default_name: Option<String>) -> Result<Instance, SchemaError> {
    if file.factors.is_empty() {
        return Err(field("factors", "at least one factor is required"));
    }
    let factors = file
        .factors
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let tau_re = rational(&f.tau_re, &format!("factors[{j}].tau_re"))?;
            if !is_squarefree(f.tau_im.d) {
                return Err(field(format!("factors[{j}].tau_im.d"), format!("{} is not a squarefree positive integer", f.tau_im.d)));
            }
            let q = rational(&f.tau_im.q, &format!("factors[{j}].tau_im.q"))?;
            EllipticFactor::new(tau_re, MultiQuad::term(q, f.tau_im.d), file.flags.no_cm)
                .map_err(|e| field(format!("factors[{j}]"), e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let variety = ProductVariety::new(factors, file.flags.pairwise_nonisogenous).map_err(|e| field("factors", e))?;
    let g = variety.g();
    let rows = file
        .l
        .iter()
        .enumerate()
        .map(|(r, row)| {
            if row.len() != g {
                return Err(field(format!("L[{r}]"), format!("expected {g} entries, found {}", row.len())));
            }
            row.iter()
                .enumerate()
                .map(|(c, s)| parse_complex(s).map_err(|e| field(format!("L[{r}][{c}]"), e)))
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let l = ComplexSubspace::new(g, rows).map_err(|e| field("L", e))?;
    let w = build_w(&file.w, g)?;
    let name = file.name.clone().or(default_name).unwrap_or_else(|| "instance".into());
    let mut inst = Instance::new(name, variety, l, w).map_err(|e| field("W", e))?;
    inst.no_cm = file.flags.no_cm;
    inst.solver = solver_config(&file.solver);
    Ok(inst)
}

fn build_w(w: &WSpec, g: usize) -> Result<WDescriptor, SchemaError> {
    let mut desc = match w.kind.as_str() {
        "segre-hypersurface" => {
            if w.coeffs.is_empty() {
                return Err(field("W.coeffs", "a segre-hypersurface needs at least one term"));
            }
            let terms = w
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let exps: [u32; 9] = c
                        .monomial
                        .clone()
                        .try_into()
                        .map_err(|_| field(format!("W.coeffs[{i}].monomial"), "expected 9 exponents"))?;
                    Ok(Monomial {
                        exps,
                        coeff: Complex::new(c.re, c.im),
                    })
                })
                .collect::<Result<Vec<_>, SchemaError>>()?;
            let f = SegrePolynomial::new(terms).map_err(|e| field("W.coeffs", e))?;
            WDescriptor::hypersurface(f, w.bidegree.map(|[m, n]| (m, n)))
        }
        "whole" => WDescriptor::whole(g),
        "point" => {
            let p = w.point.as_ref().ok_or_else(|| field("W.point", "required for kind \"point\""))?;
            WDescriptor::point(p.iter().map(|[re, im]| Complex::new(*re, *im)).collect())
        }
        other => return Err(field("W.kind", format!("unknown kind {other:?}"))),
    };
    if w.kind != "segre-hypersurface" && w.bidegree.is_some() {
        return Err(field("W.bidegree", "only applies to segre-hypersurface"));
    }
    desc.dim = w.dim;
    desc.assert_free = w.assert_free;
    desc.validate(g).map_err(|e| field("W", e))?;
    Ok(desc)
}

fn solver_config(s: &SolverSpec) -> SolverConfig {
    let d = SolverConfig::default();
    SolverConfig {
        grid: s.grid.unwrap_or(d.grid),
        budget_secs: s.budget_secs.unwrap_or(d.budget_secs),
        seed: s.seed.unwrap_or(d.seed),
        target_count: s.target_count.unwrap_or(d.target_count),
        max_cells: s.max_cells.unwrap_or(d.max_cells),
        newton_tol: s.newton_tol.unwrap_or(d.newton_tol),
        newton_max_iter: s.newton_max_iter.unwrap_or(d.newton_max_iter),
        coarse_threshold: s.coarse_threshold.unwrap_or(d.coarse_threshold),
        dedup_tol: s.dedup_tol.unwrap_or(d.dedup_tol),
    }
}
