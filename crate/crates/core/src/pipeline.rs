//! Check, certify and solve an [`Instance`] end to end.

use num_traits::Zero;
use serde::Serialize;

use crate::checker::{check_seeded, reduce_l, Verdict};
use crate::error::{EacError, Result};
use crate::forms::ExteriorForm;
use crate::homology::{class_of_hypersurface, class_of_point, class_of_whole, eac_certificate, Certificate};
use crate::instance::{Instance, WDescriptor, WKind};
use crate::multiquad::{format_complex, MultiQuad};
use crate::segre::{bidegree, ExpMap};
use crate::solver::{harvest, SolveReport, SolverSetup};
use crate::subspace::ComplexSubspace;
use crate::weierstrass::Backend;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub exact: String,
    pub value: f64,
    pub cross_check: String,
    pub cross_check_value: f64,
    /// `ω_T ∧ ω_{T'} = ratio · ω_{R_L} ∧ ω_{I_L}`.
    pub ratio: String,
    pub dim_t: usize,
    pub omega_t: String,
    pub omega_t_prime: String,
}

impl From<&Certificate> for CertificateSummary {
    fn from(c: &Certificate) -> Self {
        Self {
            exact: c.value.to_string(),
            value: c.value.to_f64(),
            cross_check: c.cross_check.to_string(),
            cross_check_value: c.cross_check.to_f64(),
            ratio: c.ratio.to_string(),
            dim_t: c.dim_t,
            omega_t: c.omega_t.to_string(),
            omega_t_prime: c.omega_t_prime.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifyReport {
    pub verdict: Verdict,
    /// `L` after cutting down to `dim L + dim W = g`.
    pub l_used: Vec<Vec<String>>,
    pub reduced: bool,
    /// Fibre counts recomputed by the argument principle.
    pub bidegree_numeric: Option<(u32, u32)>,
    pub bidegree_consistent: Option<bool>,
    pub certificate: Option<CertificateSummary>,
    pub certified: bool,
    pub reason: Option<String>,
}

/// Poincaré dual form of `[W]`.
pub fn eta_of(w: &WDescriptor, bideg: Option<(u32, u32)>, g: usize) -> Result<ExteriorForm<MultiQuad>> {
    let class = match &w.kind {
        WKind::SegreHypersurface(_) => {
            let (m, n) = bideg.ok_or_else(|| EacError::Precondition("bidegree unknown".into()))?;
            class_of_hypersurface(m.into(), n.into())?
        }
        WKind::Whole => class_of_whole(g),
        WKind::Point(_) => class_of_point(g),
    };
    Ok(class.poincare_dual())
}

fn basis_strings(l: &ComplexSubspace) -> Vec<Vec<String>> {
    l.basis().iter().map(|v| v.iter().map(format_complex).collect()).collect()
}

/// Verdicts, the reduction of `L`, the bidegree cross-check and the
/// certificate. Returns the report and the `L` the solver should use.
pub fn certify(inst: &Instance) -> Result<(CertifyReport, ComplexSubspace)> {
    let a = &inst.variety;
    let seed = inst.solver.seed;
    let verdict = check_seeded(&inst.l, &inst.w, a, seed)?;
    let mut report = CertifyReport {
        l_used: basis_strings(&inst.l),
        reduced: false,
        bidegree_numeric: None,
        bidegree_consistent: None,
        certificate: None,
        certified: false,
        reason: None,
        verdict,
    };
    if !report.verdict.is_free_and_rotund() {
        let v = &report.verdict;
        let witness = v
            .free
            .witness
            .as_ref()
            .map(|w| w.label())
            .or_else(|| v.rotund.witness.as_ref().map(|r| format!("rotundity fails at {}", crate::checker::subset_label(&r.subset))));
        report.reason = Some(match witness {
            Some(w) => format!("not free and rotund ({w})"),
            None => "freeness or rotundity indeterminate".into(),
        });
        return Ok((report, inst.l.clone()));
    }
    let l = if inst.l.dim() + inst.w.dim > a.g() {
        report.reduced = true;
        reduce_l(&inst.l, &inst.w, a, seed)?
    } else {
        inst.l.clone()
    };
    report.l_used = basis_strings(&l);
    if let (WKind::SegreHypersurface(f), Some(given)) = (&inst.w.kind, report.verdict.bidegree) {
        let exp = ExpMap::new(a, Backend::Theta)?;
        let numeric = bidegree(f, &exp, seed)?;
        report.bidegree_numeric = Some(numeric);
        report.bidegree_consistent = Some(numeric == given);
        if numeric != given {
            report.reason = Some(format!("bidegree {given:?} disagrees with fibre counts {numeric:?}"));
            return Ok((report, l));
        }
    }
    let eta = eta_of(&inst.w, report.verdict.bidegree, a.g())?;
    let cert = eac_certificate(&eta, &l, a)?;
    report.certified = !cert.value.is_zero();
    if !report.certified {
        report.reason = Some("certificate vanishes".into());
    }
    report.certificate = Some((&cert).into());
    Ok((report, l))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub certify: CertifyReport,
    pub solve: SolveReport,
    /// Certified instance, budget not exhausted, nothing found.
    pub defect: bool,
}

/// Harvests up to `target` solutions of a certified instance.
pub fn solve(inst: &Instance, target: usize) -> Result<SolveOutcome> {
    let (cert, l) = certify(inst)?;
    if !cert.certified {
        return Err(EacError::Precondition(format!(
            "instance is not certified: {}",
            cert.reason.clone().unwrap_or_default()
        )));
    }
    let setup = SolverSetup::new(&inst.variety, &l, &inst.w, &inst.solver)?;
    let report = harvest(&setup, target);
    Ok(SolveOutcome {
        defect: report.solutions.is_empty(),
        certify: cert,
        solve: report,
    })
}
