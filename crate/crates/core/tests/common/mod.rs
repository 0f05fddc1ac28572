//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use hql_core::analysis::random_unit_quotient_matrix;
use hql_core::pde::{linearize, newton_solve, residual, BoundaryData, Operator, ProblemSpec};
use hql_core::rng::SplitMix64;
use hql_core::spectral::SymMatrix;
use hql_core::transform::subtract_shift_quadratic;
use hql_core::{GridFunction, QuadraticForm, Result};

pub fn diag(d: &[f64]) -> QuadraticForm {
    QuadraticForm::pure(SymMatrix::diagonal(d))
}

pub fn quotient_problem(n: usize, m: usize, boundary: BoundaryData) -> ProblemSpec {
    ProblemSpec::new(n, m, 1.0, Operator::Quotient21, 1.0, boundary)
}

/// Five boundary fixtures per dimension for the quotient-to-σ₂ cross-check:
/// n = 2 at m = 33 and n = 3 at m = 17.
pub fn transformation_fixtures() -> Vec<(String, ProblemSpec)> {
    let mut rng = SplitMix64::new(515);
    let rot2 = QuadraticForm::pure(random_unit_quotient_matrix(&mut rng, 2).unwrap());
    let rot3 = QuadraticForm::pure(random_unit_quotient_matrix(&mut rng, 3).unwrap());
    let wave = |form: QuadraticForm, amplitude: f64| BoundaryData::Perturbed { form, amplitude, frequency: 2.0 };
    let two = vec![
        ("aniso", BoundaryData::quadratic(diag(&[3.0, 1.5]))),
        ("rotated", BoundaryData::quadratic(rot2.clone())),
        ("cubic", BoundaryData::ExactCubic { a: 3.0 }),
        ("wave", wave(diag(&[3.0, 1.5]), 0.2)),
        ("rotated-wave", wave(rot2, 0.1)),
    ];
    let three = vec![
        ("iso", BoundaryData::quadratic(QuadraticForm::isotropic(3, 1.0))),
        ("saddle", BoundaryData::quadratic(diag(&[3.0, 3.0, -0.6]))),
        ("rotated", BoundaryData::quadratic(rot3.clone())),
        ("wave", wave(diag(&[2.0, 1.0, 0.5]), 0.1)),
        ("rotated-wave", wave(rot3, 0.1)),
    ];
    two.into_iter()
        .map(|(id, b)| (format!("n2-{id}"), quotient_problem(2, 33, b)))
        .chain(three.into_iter().map(|(id, b)| (format!("n3-{id}"), quotient_problem(3, 17, b))))
        .collect()
}

/// Solves σ₂/σ₁ = 1, subtracts |x|²/(2(n−1)), and compares with the direct
/// σ₂ = n/(2(n−1)) solve on the shifted data. Returns the sup-norm gap.
pub fn transformation_gap(spec: &ProblemSpec) -> Result<f64> {
    let n = spec.dimension;
    let (u, _) = newton_solve(spec)?;
    let shifted = ProblemSpec {
        operator: Operator::Sigma2,
        rhs: n as f64 / (2.0 * (n as f64 - 1.0)),
        boundary: spec.boundary.clone().minus_shift_quadratic(n),
        ..spec.clone()
    };
    let (v, _) = newton_solve(&shifted)?;
    subtract_shift_quadratic(&u)?.sup_distance(&v)
}

/// Admissible fields for the Jacobian check: a smooth analytic field, a
/// solved field, and a non-convex field, under both operators.
pub fn jacobian_fixtures() -> Vec<(String, GridFunction, ProblemSpec)> {
    let mut out = Vec::new();
    let cubic = quotient_problem(2, 17, BoundaryData::ExactCubic { a: 3.0 });
    out.push(("cubic-sampled".to_string(), cubic.boundary.field(&cubic.grid().unwrap()).unwrap(), cubic.clone()));
    let wave = quotient_problem(
        3,
        9,
        BoundaryData::Perturbed { form: diag(&[2.0, 1.0, 0.5]), amplitude: 0.1, frequency: 2.0 },
    );
    let (u, _) = newton_solve(&wave).unwrap();
    out.push(("wave3-solved".to_string(), u.clone(), wave.clone()));
    let saddle = quotient_problem(3, 9, BoundaryData::quadratic(diag(&[3.0, 3.0, -0.6])));
    let grid = saddle.grid().unwrap();
    let s = GridFunction::from_fn(grid, |x| {
        1.5 * x[0] * x[0] + 1.5 * x[1] * x[1] - 0.3 * x[2] * x[2] + 0.05 * (x[0] + 2.0 * x[1] - x[2]).sin()
    })
    .unwrap();
    out.push(("saddle3-sampled".to_string(), s, saddle));
    let sigma2 = ProblemSpec { operator: Operator::Sigma2, rhs: 0.75, ..wave };
    out.push(("wave3-sigma2".to_string(), subtract_shift_quadratic(&u).unwrap(), sigma2));
    out
}

/// Worst relative error, over `directions` random interior directions w,
/// between the central difference (R(u+εw) − R(u−εw))/(2ε) and the
/// linearization applied to w, with ε = 1e−6·(1 + ‖u‖∞).
pub fn jacobian_fd_error(u: &GridFunction, spec: &ProblemSpec, rng: &mut SplitMix64, directions: usize) -> f64 {
    let lin = linearize(u, spec).unwrap();
    let interior = lin.interior_nodes().to_vec();
    let eps = 1e-6 * (1.0 + u.sup_norm());
    let mut worst = 0.0f64;
    for _ in 0..directions {
        let w: Vec<f64> = (0..interior.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let shifted = |sign: f64| {
            let mut v = u.values().to_vec();
            for (k, &p) in interior.iter().enumerate() {
                v[p] += sign * eps * w[k];
            }
            residual(&GridFunction::new(u.grid().clone(), v).unwrap(), spec).unwrap()
        };
        let (plus, minus) = (shifted(1.0), shifted(-1.0));
        let jw = lin.apply(&w);
        let scale = jw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = interior
            .iter()
            .zip(&jw)
            .map(|(&p, j)| ((plus.values()[p] - minus.values()[p]) / (2.0 * eps) - j).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(diff / scale);
    }
    worst
}

/// Value at the origin of the σ₂/σ₁ = 1 solution for the exact cubic data.
pub fn cubic_center_value(m: usize) -> f64 {
    let (u, _) = newton_solve(&quotient_problem(2, m, BoundaryData::ExactCubic { a: 3.0 })).unwrap();
    u.values()[u.grid().center_node()]
}
