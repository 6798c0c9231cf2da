//! Command bodies. Each returns a JSON report and an exit code.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use eac_core::checker::check_seeded;
use eac_core::hull::{chain_report, hull_chain, rational_hull};
use eac_core::pipeline::{certify, solve};
use eac_core::solver::SolveReport;
use eac_core::EacError;
use serde::Serialize;
use serde_json::{json, Value};

use crate::schema::Loaded;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_FREE_ROTUND: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;
pub const EXIT_UNCERTIFIED: i32 = 4;
/// Certified instance, no solution within budget.
pub const EXIT_DEFECT: i32 = 5;

/// Command-line overrides of the instance's solver settings.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<f64>,
    pub grid: Option<usize>,
    pub target: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, loaded: &mut Loaded) {
        let s = &mut loaded.instance.solver;
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.budget {
            s.budget_secs = v;
        }
        if let Some(v) = self.grid {
            s.grid = v;
        }
        if let Some(v) = self.target {
            s.target_count = v;
        }
    }
}

pub struct Outcome {
    pub report: Value,
    pub exit: i32,
    /// Solution table for `--csv`.
    pub solutions: Option<SolveReport>,
}

fn envelope(command: &str, loaded: &Loaded, body: Value, started: Instant) -> Value {
    let inst = &loaded.instance;
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "instance": inst.name,
        "instance_sha256": loaded.sha256,
        "g": inst.g(),
        "flags": {"pairwise_nonisogenous": inst.variety.pairwise_nonisogenous, "no_cm": inst.no_cm},
        "seed": inst.solver.seed,
        "solver": inst.solver,
        "result": body,
        "timings": {"elapsed_ms": started.elapsed().as_secs_f64() * 1e3},
    })
}

fn to_value<T: Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).context("serialising report")
}

pub fn check(loaded: &Loaded) -> Result<Outcome> {
    let t0 = Instant::now();
    let inst = &loaded.instance;
    let v = check_seeded(&inst.l, &inst.w, &inst.variety, inst.solver.seed)?;
    let exit = v.exit_code();
    let body = json!({
        "free_and_rotund": v.is_free_and_rotund(),
        "witness": v.free.witness.as_ref().map(|w| w.label()),
        "verdict": to_value(&v)?,
    });
    Ok(Outcome {
        report: envelope("check", loaded, body, t0),
        exit,
        solutions: None,
    })
}

pub fn hull(loaded: &Loaded) -> Result<Outcome> {
    let t0 = Instant::now();
    let inst = &loaded.instance;
    let h = rational_hull(&inst.l, &inst.variety)?;
    let chain = hull_chain(&inst.l, &inst.variety)?;
    let equations: Vec<Vec<String>> = h
        .codim_equations
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect();
    let basis: Vec<Vec<String>> = h.t.basis().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
    let body = json!({
        "T": {"dim": h.dim_t, "basis": basis, "equations": equations},
        "k": chain.k,
        "non_free": chain.non_free,
        "real_dims": chain.real_dims(),
        "chain": to_value(&chain_report(&chain))?,
    });
    Ok(Outcome {
        report: envelope("hull", loaded, body, t0),
        exit: EXIT_OK,
        solutions: None,
    })
}

pub fn certify_cmd(loaded: &Loaded) -> Result<Outcome> {
    let t0 = Instant::now();
    let (rep, _) = certify(&loaded.instance)?;
    let exit = if rep.certified {
        EXIT_OK
    } else if rep.verdict.is_free_and_rotund() {
        EXIT_UNCERTIFIED
    } else {
        rep.verdict.exit_code()
    };
    Ok(Outcome {
        report: envelope("certify", loaded, to_value(&rep)?, t0),
        exit,
        solutions: None,
    })
}

/// `solve` and `density` differ only in their default target.
pub fn solve_cmd(loaded: &Loaded, command: &str, target: usize) -> Result<Outcome> {
    let t0 = Instant::now();
    match solve(&loaded.instance, target) {
        Ok(out) => {
            let exit = if out.defect { EXIT_DEFECT } else { EXIT_OK };
            let solutions = out.solve.clone();
            Ok(Outcome {
                report: envelope(command, loaded, to_value(&out)?, t0),
                exit,
                solutions: Some(solutions),
            })
        }
        Err(EacError::Precondition(msg)) => {
            let (rep, _) = certify(&loaded.instance)?;
            let body = json!({"error": msg, "certify": to_value(&rep)?});
            Ok(Outcome {
                report: envelope(command, loaded, body, t0),
                exit: EXIT_UNCERTIFIED,
                solutions: None,
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// `Re l, Im l, residual, cell` per solution (first `L`-parameter).
pub fn write_csv(path: &Path, report: &SolveReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["re_l", "im_l", "residual", "cell", "cell_p", "cell_q", "jacobian_rank"])?;
    for s in &report.solutions {
        let l = s.l.first().copied().unwrap_or([0.0, 0.0]);
        w.write_record([
            format!("{:e}", l[0]),
            format!("{:e}", l[1]),
            format!("{:e}", s.residual),
            s.domain_cell.to_string(),
            s.cell.0.to_string(),
            s.cell.1.to_string(),
            s.jacobian_rank.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Report text with the `timings` block removed, for reproducibility checks.
pub fn without_timings(report: &Value) -> Value {
    let mut r = report.clone();
    if let Some(o) = r.as_object_mut() {
        o.remove("timings");
    }
    r
}
