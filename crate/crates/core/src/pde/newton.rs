//! Damped Newton iteration with continuation in the boundary data.
//!
//! The start is the admissible quadratic ½a|x|² with operator(aI) = rhs. The
//! boundary trace is blended from that quadratic to the target over the
//! configured number of continuation levels; at each level the previous
//! solution plus the matching increment of a full-grid extension of the data
//! is the predictor (or, if that leaves Γ₂, the previous interior with only
//! the boundary moved), and Newton corrects it. A failed level is retried
//! with half the continuation step; once the refinements are used up the
//! failure is reported as stagnation.
//!
//! The scheme is a plain central-difference discretization, not a monotone
//! one; it is meant for smooth solutions.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::pde::linear::BandedLu;
use crate::pde::problem::{ProblemSpec, SolverOptions};
use crate::pde::residual::{Discretization, FieldEval, LinearizedOperator};
use crate::transform::eval_quadratic;

/// Extremes of the discrete Hessian field over the interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianStats {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub max_abs_entry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Newton iterations summed over all continuation levels.
    pub iterations: usize,
    /// Residual sup-norm before each Newton step and after the last one.
    pub residual_history: Vec<f64>,
    /// Accepted step length of every Newton step.
    pub damping_history: Vec<f64>,
    /// Continuation parameters reached, ending at 1.
    pub continuation_levels: Vec<f64>,
    pub final_residual: f64,
    pub tolerance: f64,
    /// min over interior nodes of min(σ₁, σ₂) of the discrete Hessian.
    pub admissibility_margin: f64,
    pub hessian: HessianStats,
    /// Not serialized, so that report files are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

struct LevelOutcome {
    values: Vec<f64>,
    eval: FieldEval,
    residuals: Vec<f64>,
    dampings: Vec<f64>,
}

/// [`newton_solve_with`] under the default options.
pub fn newton_solve(spec: &ProblemSpec) -> Result<(GridFunction, SolveReport)> {
    newton_solve_with(spec, &SolverOptions::default())
}

pub fn newton_solve_with(spec: &ProblemSpec, opts: &SolverOptions) -> Result<(GridFunction, SolveReport)> {
    let clock = Instant::now();
    let grid = spec.validate()?;
    let disc = Discretization::new(&grid);
    let tolerance = opts.tolerance_factor * (1.0 + spec.rhs);

    let start = eval_quadratic(&spec.start_quadratic(), &grid)?;
    let target = spec.boundary.field(&grid)?;
    let increment: Vec<f64> = target.values().iter().zip(start.values()).map(|(t, s)| t - s).collect();
    let boundary = grid.boundary_nodes();

    let mut u = start.values().to_vec();
    let mut eval = disc.evaluate(&u, spec.operator, spec.rhs)?;
    if !(eval.min_margin() > 0.0) {
        return Err(Error::NonAdmissibleStart(disc.admissibility_error(&eval, "initial quadratic")));
    }

    let mut report_residuals = Vec::new();
    let mut report_dampings = Vec::new();
    let mut levels = Vec::new();
    let mut t = 0.0f64;
    let mut dt = 1.0 / spec.continuation_steps as f64;
    let mut refinements = 0;

    while t < 1.0 {
        let mut t_next = t + dt;
        if t_next > 1.0 - 1e-12 {
            t_next = 1.0;
        }
        let step = t_next - t;
        let set_boundary = |field: &mut Vec<f64>| {
            for &p in &boundary {
                field[p] = if t_next == 1.0 { target.values()[p] } else { start.values()[p] + t_next * increment[p] };
            }
        };
        // Previous solution plus the data increment; if that leaves Γ₂, the
        // previous interior with only the boundary moved.
        let mut trial: Vec<f64> = u.iter().zip(&increment).map(|(v, d)| v + step * d).collect();
        set_boundary(&mut trial);
        let mut predicted = disc.evaluate(&trial, spec.operator, spec.rhs)?;
        if !(predicted.min_margin() > 0.0) {
            let mut fallback = u.clone();
            set_boundary(&mut fallback);
            let fe = disc.evaluate(&fallback, spec.operator, spec.rhs)?;
            if fe.min_margin() > predicted.min_margin() {
                trial = fallback;
                predicted = fe;
            }
        }
        let outcome = if predicted.min_margin() > 0.0 {
            newton_level(&disc, spec, opts, tolerance, trial, predicted, report_dampings.len(), t_next)
        } else {
            Err(Error::Stagnation {
                iteration: report_dampings.len(),
                level: t,
                residual: f64::NAN,
                reason: format!(
                    "no admissible predictor for level {t_next}: {}",
                    disc.admissibility_error(&predicted, "predictor")
                ),
            })
        };
        match outcome {
            Ok(out) => {
                u = out.values;
                eval = out.eval;
                report_residuals.extend(out.residuals);
                report_dampings.extend(out.dampings);
                levels.push(t_next);
                t = t_next;
            }
            Err(e) if refinements < opts.max_continuation_refinements && e.is_solver_failure() => {
                refinements += 1;
                dt *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }

    let final_residual = eval.residual_sup();
    let mut min_eig = f64::INFINITY;
    let mut max_eig = f64::NEG_INFINITY;
    let mut max_abs = 0.0f64;
    for (k, node) in eval.nodes.iter().enumerate() {
        min_eig = min_eig.min(node.eig.eigenvalues[0]);
        max_eig = max_eig.max(*node.eig.eigenvalues.last().unwrap());
        let h = disc.stencil.hessian(&u, disc.interior[k]);
        max_abs = h.iter().fold(max_abs, |m, v| m.max(v.abs()));
    }
    let report = SolveReport {
        iterations: report_dampings.len(),
        residual_history: report_residuals,
        damping_history: report_dampings,
        continuation_levels: levels,
        final_residual,
        tolerance,
        admissibility_margin: eval.min_margin(),
        hessian: HessianStats { min_eigenvalue: min_eig, max_eigenvalue: max_eig, max_abs_entry: max_abs },
        wall_time: clock.elapsed(),
    };
    Ok((GridFunction::new(grid, u)?, report))
}

#[allow(clippy::too_many_arguments)]
fn newton_level(
    disc: &Discretization,
    spec: &ProblemSpec,
    opts: &SolverOptions,
    tolerance: f64,
    mut u: Vec<f64>,
    mut eval: FieldEval,
    done: usize,
    level: f64,
) -> Result<LevelOutcome> {
    let mut r = eval.residual_sup();
    let mut residuals = vec![r];
    let mut dampings = Vec::new();

    for iteration in 0..opts.max_iterations {
        if r <= tolerance {
            return Ok(LevelOutcome { values: u, eval, residuals, dampings });
        }
        let coeffs = disc.coefficients(&eval, spec.operator)?;
        let jac = LinearizedOperator::from_parts(disc.clone(), coeffs).assemble();
        let mut delta: Vec<f64> = eval.residuals().iter().map(|v| -v).collect();
        BandedLu::factor(&jac)?.solve_in_place(&mut delta)?;

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = u.clone();
            for (k, &p) in disc.interior.iter().enumerate() {
                trial[p] += alpha * delta[k];
            }
            let te = disc.evaluate(&trial, spec.operator, spec.rhs)?;
            if te.min_margin() >= opts.margin_floor {
                let tr = te.residual_sup();
                if tr <= opts.sufficient_decrease * r {
                    accepted = Some((trial, te, tr));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, te, tr)) = accepted else {
            return Err(Error::Stagnation {
                iteration: done + iteration,
                level,
                residual: r,
                reason: format!("no sufficient decrease after {} step halvings", opts.max_halvings),
            });
        };
        u = trial;
        eval = te;
        r = tr;
        residuals.push(r);
        dampings.push(alpha);
    }
    if r <= tolerance {
        return Ok(LevelOutcome { values: u, eval, residuals, dampings });
    }
    Err(Error::IterationCap { iterations: opts.max_iterations, residual: r })
}
