use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use eac_cli::commands::{self, Outcome, Overrides};
use eac_cli::schema;
use eac_cli::selftest;

#[derive(Parser, Debug)]
#[command(name = "eac", version, about = "Free/rotund checks, certificates and solutions for exp(L) ∩ W on products of elliptic curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Instance file (JSON)
    file: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Wall-clock budget in seconds
    #[arg(long)]
    budget: Option<f64>,
    /// Grid points per side of each fundamental-domain cell
    #[arg(long)]
    grid: Option<usize>,
    /// Number of distinct solutions wanted
    #[arg(long)]
    target: Option<usize>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Freeness and rotundity (exit 0 = both, 2 = not, 3 = indeterminate)
    Check(Common),
    /// Rational hull T of L and the chain L0 <= T0 <= L1 <= ...
    Hull(Common),
    /// Homological certificate (exit 4 if free and rotund but uncertified)
    Certify(Common),
    /// Find solutions (default target from the instance)
    Solve(Common),
    /// Harvest many solutions (default target 25)
    Density {
        #[command(flatten)]
        common: Common,
        /// Also write (Re l, Im l, residual, cell) as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the built-in property suite
    Selftest {
        /// Ignored; the suite runs on a built-in catalog
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Multiply every wp value by (1 + REL) to exercise the suite
        #[arg(long, value_name = "REL")]
        inject_fault: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(c: &Common) -> Result<schema::Loaded> {
    let mut loaded = schema::load(&c.file).with_context(|| format!("loading {}", c.file.display()))?;
    Overrides {
        seed: c.seed,
        budget: c.budget,
        grid: c.grid,
        target: c.target,
    }
    .apply(&mut loaded);
    Ok(loaded)
}

fn emit(report: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{text}").and_then(|_| out.flush()) {
                // a closed pipe (e.g. `| head`) is not an error
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let finish = |o: Outcome, c: &Common| -> Result<i32> {
        emit(&o.report, c.out.as_deref())?;
        Ok(o.exit)
    };
    match cli.command {
        Command::Check(c) => finish(commands::check(&load(&c)?)?, &c),
        Command::Hull(c) => finish(commands::hull(&load(&c)?)?, &c),
        Command::Certify(c) => finish(commands::certify_cmd(&load(&c)?)?, &c),
        Command::Solve(c) => {
            let loaded = load(&c)?;
            let target = loaded.instance.solver.target_count;
            finish(commands::solve_cmd(&loaded, "solve", target)?, &c)
        }
        Command::Density { common, csv } => {
            let loaded = load(&common)?;
            let target = common.target.unwrap_or(25);
            let o = commands::solve_cmd(&loaded, "density", target)?;
            if let (Some(path), Some(rep)) = (csv.as_deref(), o.solutions.as_ref()) {
                commands::write_csv(path, rep)?;
            }
            finish(o, &common)
        }
        Command::Selftest {
            file: _,
            seed,
            inject_fault,
            out,
        } => {
            let rows = selftest::run(&selftest::Config { fault: inject_fault, seed });
            for r in &rows {
                eprintln!("{} {:<48} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            let failed = rows.iter().filter(|r| !r.passed).count();
            emit(
                &serde_json::json!({"command": "selftest", "seed": seed, "fault": inject_fault, "failed": failed, "checks": rows}),
                out.as_deref(),
            )?;
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
