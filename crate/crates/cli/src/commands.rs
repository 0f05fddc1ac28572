//! The four subcommands. Each one parses and validates its whole config
//! before creating the output directory, so a rejected config leaves no
//! files behind. Malformed configs are usage errors (exit 2); well-formed
//! configs that violate a precondition, such as a non-positive right-hand
//! side, are domain errors (exit 3).

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use hql_core::analysis::{interior_estimate_experiment, liouville_probe, InteriorConfig, LiouvilleConfig};
use hql_core::pde::newton_solve_with;
use hql_core::plot::{Plot, Series};
use hql_core::suites::{run_verify, VerifyConfig};

use crate::config::{load, with_schema, Loaded, SolveConfig};
use crate::error::CliError;
use crate::output::OutDir;

/// Shared command-line options.
pub struct Options<'a> {
    pub config: Option<&'a Path>,
    pub out: &'a Path,
    pub seed: Option<u64>,
}

fn require_seed<T>(loaded: &Loaded<T>, needed: bool) -> Result<(), CliError> {
    if needed && !loaded.seeded {
        return Err(CliError::Usage("config uses randomness but has no seed; add \"seed\" or pass --seed".into()));
    }
    Ok(())
}

fn document<T: Serialize, R: Serialize>(config: &T, result: &R) -> Value {
    json!({ "schema": crate::config::SCHEMA_VERSION, "config": with_schema(config), "result": result })
}

pub fn verify(opts: &Options) -> Result<String, CliError> {
    let loaded: Loaded<VerifyConfig> = load(opts.config, opts.seed)?;
    require_seed(&loaded, true)?;
    let cfg = loaded.config;
    cfg.validate()?;
    let summary = run_verify(&cfg)?;
    let out = OutDir::create(opts.out)?;
    out.write_json("verify.json", &document(&cfg, &summary))?;
    let failed: Vec<String> =
        summary.results.iter().filter(|r| !r.pass).map(|r| format!("{} (n = {})", r.property, r.n)).collect();
    if failed.is_empty() {
        Ok(format!("verify: {} checks passed", summary.results.len()))
    } else {
        Err(CliError::CheckFailed(format!("{} of {} checks failed: {}", failed.len(), summary.results.len(), failed.join(", "))))
    }
}

pub fn solve(opts: &Options) -> Result<String, CliError> {
    let loaded: Loaded<SolveConfig> = load(opts.config, opts.seed)?;
    let cfg = loaded.config;
    cfg.problem.validate()?;
    let (u, report) = newton_solve_with(&cfg.problem, &cfg.solver)?;
    let out = OutDir::create(opts.out)?;
    out.write("solution.hqlg", &u.to_binary()?)?;
    out.write("solution.csv", u.to_csv().as_bytes())?;
    out.write_json("report.json", &document(&cfg, &report))?;
    let history = report.residual_history.iter().enumerate().map(|(k, &r)| (k as f64, r)).collect();
    let plot = Plot::new("Newton residual history", "iteration", "sup |F(u)|")
        .log_y()
        .with(Series::line("residual", history));
    out.write("residual.svg", plot.to_svg().as_bytes())?;
    Ok(format!(
        "solve: converged in {} iterations, residual {:e}, margin {:e}",
        report.iterations, report.final_residual, report.admissibility_margin
    ))
}

pub fn liouville(opts: &Options) -> Result<String, CliError> {
    let loaded: Loaded<LiouvilleConfig> = load(opts.config, opts.seed)?;
    require_seed(&loaded, loaded.config.uses_randomness())?;
    let cfg = loaded.config;
    if cfg.fixtures.is_empty() && !cfg.uses_randomness() {
        return Err(CliError::Usage("liouville config lists no fixtures".into()));
    }
    cfg.all_fixtures()?;
    let report = liouville_probe(&cfg)?;
    let out = OutDir::create(opts.out)?;
    out.write_json("liouville.json", &document(&cfg, &report))?;
    let failed: Vec<&str> = report.entries.iter().filter(|e| !e.pass).map(|e| e.id.as_str()).collect();
    if failed.is_empty() {
        Ok(format!("liouville: all {} fixtures are quadratic within {:e}", report.entries.len(), report.tolerance))
    } else {
        Err(CliError::CheckFailed(format!("fixtures above tolerance: {}", failed.join(", "))))
    }
}

pub fn interior(opts: &Options) -> Result<String, CliError> {
    let loaded: Loaded<InteriorConfig> = load(opts.config, opts.seed)?;
    require_seed(&loaded, loaded.config.uses_randomness())?;
    let cfg = loaded.config;
    cfg.validate()?;
    let report = interior_estimate_experiment(&cfg)?;
    let out = OutDir::create(opts.out)?;
    out.write("interior.csv", report.to_csv().as_bytes())?;
    out.write_json("interior.json", &document(&cfg, &report))?;
    let mut plot = Plot::new("Hessian at the origin against the Lipschitz norm", "Lipschitz norm of u", "max |D²u(0)|");
    for fam in &cfg.families {
        let points = report
            .runs
            .iter()
            .filter(|r| r.boundary_id == fam.id)
            .filter_map(|r| Some((r.lip_norm?, r.hess0_max?)))
            .collect();
        plot = plot.with(Series::line(fam.id.clone(), points));
    }
    out.write("interior.svg", plot.to_svg().as_bytes())?;
    let failed = report.runs.iter().filter(|r| r.error.is_some()).count();
    let drift = report.max_nonquadratic_drift().map_or("n/a".to_string(), |d| format!("{:.3}%", 100.0 * d));
    Ok(format!("interior: {} runs, {failed} failed, max non-quadratic drift {drift}", report.runs.len()))
}
