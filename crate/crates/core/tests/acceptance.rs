//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use hql_core::analysis::{
    c_of_n, interior_estimate_experiment, liouville_probe, InteriorConfig, LiouvilleConfig, INTERIOR_CSV_HEADER,
};
use hql_core::rng::SplitMix64;
use hql_core::suites::{self, run_verify, VerifyConfig, VerifySummary};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn worst_of(summary: &VerifySummary, property: &str) -> (f64, usize, usize, bool) {
    summary.property(property).fold((f64::NEG_INFINITY, 0, 0, true), |(w, v, s, p), r| {
        (w.max(r.worst), v + r.violations, s + r.samples, p && r.pass)
    })
}

fn verify_run() -> (VerifySummary, Duration) {
    let cfg = VerifyConfig {
        seed: 20240611,
        dimensions: (2..=10).collect(),
        samples: 10_000,
        duality_dimensions: Some((3..=8).collect()),
        duality_samples: 1_000,
        grid_samples: 20,
    };
    let t = Instant::now();
    let summary = run_verify(&cfg).expect("verify suites run");
    (summary, t.elapsed())
}

fn criterion1(v: &VerifySummary, elapsed: Duration) -> Outcome {
    let (worst, viol, samples, pass) = worst_of(v, suites::LEMMA_IDENTITY);
    let fast = elapsed <= Duration::from_secs(10);
    outcome(
        pass && fast && samples == 90_000,
        format!("{samples} samples, worst |σ₂(μ) − n q²/(2(n−1))|/(1+σ₁²) = {worst:.3e}, {viol} violations, {:.2?}", elapsed),
    )
}

fn criterion2(v: &VerifySummary) -> Outcome {
    let (bound, bv, _, bp) = worst_of(v, suites::LEMMA_SIGMA1_BOUND);
    let (_, cv, samples, cp) = worst_of(v, suites::LEMMA_CONE);
    outcome(
        bp && cp,
        format!("{samples} samples, max(½ − σ₁(μ)/σ₁(λ)) = {bound:.3e}, {bv} bound and {cv} cone violations"),
    )
}

fn criterion3(v: &VerifySummary) -> Outcome {
    let (worst, viol, samples, pass) = worst_of(v, suites::NEWTON_MACLAURIN);
    outcome(
        pass && samples == 90_000,
        format!("{samples} samples, worst −gap/(1+σ₁²) = {worst:.3e}, {viol} violations"),
    )
}

fn criterion4(v: &VerifySummary) -> Outcome {
    let (worst, viol, samples, pass) = worst_of(v, suites::DUALITY);
    outcome(
        pass && samples == 6_000,
        format!("{samples} SPD matrices, worst relative gap {worst:.3e}, {viol} violations"),
    )
}

fn criterion5() -> Outcome {
    let t = Instant::now();
    let gaps: Vec<(String, Result<f64, String>)> = common::transformation_fixtures()
        .par_iter()
        .map(|(id, spec)| (id.clone(), common::transformation_gap(spec).map_err(|e| e.to_string())))
        .collect();
    let elapsed = t.elapsed();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (id, g) in &gaps {
        match g {
            Ok(g) if *g <= 1e-8 => worst = worst.max(*g),
            Ok(g) => failures.push(format!("{id}: {g:.3e}")),
            Err(e) => failures.push(format!("{id}: {e}")),
        }
    }
    let fast = elapsed <= Duration::from_secs(180);
    outcome(
        failures.is_empty() && fast && gaps.len() == 10,
        format!("{} fixtures, worst sup gap {worst:.3e}, {:.2?}{}", gaps.len(), elapsed, list(&failures)),
    )
}

fn criterion6() -> Outcome {
    match liouville_probe(&LiouvilleConfig::default()) {
        Ok(rep) => {
            let res = rep.entries.iter().map(|e| e.fit.residual).fold(0.0, f64::max);
            let spread = rep.entries.iter().map(|e| e.fit.hessian_spread).fold(0.0, f64::max);
            outcome(
                rep.all_pass && res <= 1e-8 && spread <= 1e-8,
                format!("{} fixtures, max fit residual {res:.3e}, max Hessian spread {spread:.3e}", rep.entries.len()),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

/// c(n) with √(3n²+1) taken to 17 decimals in integer arithmetic.
fn c_oracle(n: u128) -> f64 {
    let scale = 10u128.pow(17);
    let root = ((3 * n * n + 1) * scale * scale).isqrt();
    (root - (n - 1) * scale) as f64 / (2.0 * n as f64 * scale as f64)
}

fn criterion7() -> Outcome {
    let c3 = c_of_n(3).unwrap();
    let c5 = c_of_n(5).unwrap();
    let values_ok = (c3 - c_oracle(3)).abs() <= 1e-6
        && (c5 - c_oracle(5)).abs() <= 1e-6
        && (c3 - 0.5485838).abs() <= 1e-6
        && (c5 - 0.4717798).abs() <= 1e-6;
    let rel = (2..=64u128)
        .map(|n| ((c_of_n(n as usize).unwrap() - c_oracle(n)) / c_oracle(n)).abs())
        .fold(0.0, f64::max);
    let cs: Vec<f64> = (2..=64).map(|n| c_of_n(n).unwrap()).collect();
    let monotone = cs.windows(2).all(|w| w[1] < w[0]);
    let limit = (3f64.sqrt() - 1.0) / 2.0;
    let gap64 = (cs[cs.len() - 1] - limit).abs();
    outcome(
        values_ok && rel <= 1e-14 && monotone && gap64 <= 1e-3,
        format!(
            "c(3) = {c3:.9}, c(5) = {c5:.9}, oracle rel. error {rel:.1e}, monotone on 2..64: {monotone}, \
             |c(64) − (√3−1)/2| = {gap64:.3e} (bound 1e-3; c(n) − limit ≈ 1/(2n))"
        ),
    )
}

fn criterion8() -> Outcome {
    let fixtures = common::jacobian_fixtures();
    let errors: Vec<(String, f64)> = fixtures
        .par_iter()
        .enumerate()
        .map(|(k, (id, u, spec))| {
            let mut rng = SplitMix64::new(800 + k as u64);
            (id.clone(), common::jacobian_fd_error(u, spec, &mut rng, 20))
        })
        .collect();
    let worst = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    outcome(
        worst <= 1e-6,
        format!("{} fixtures x 20 directions, worst relative error {worst:.3e}", errors.len()),
    )
}

fn criterion9() -> Outcome {
    let cfg = InteriorConfig::default();
    let (a, b) = match (interior_estimate_experiment(&cfg), interior_estimate_experiment(&cfg)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let (csv_a, csv_b) = (a.to_csv(), b.to_csv());
    let identical = csv_a.as_bytes() == csv_b.as_bytes();
    let header = csv_a.lines().next() == Some(INTERIOR_CSV_HEADER)
        && INTERIOR_CSV_HEADER.contains("K_semiconvex")
        && INTERIOR_CSV_HEADER.contains("thm31_margin");
    let drift = a.max_nonquadratic_drift().unwrap_or(f64::INFINITY);
    let families = a.drift.iter().filter(|d| !d.quadratic).count();
    outcome(
        identical && header && drift <= 0.02 && families > 0,
        format!(
            "{} runs, {families} non-quadratic families, max drift {:.3}%, byte-identical CSV: {identical}",
            a.runs.len(),
            100.0 * drift
        ),
    )
}

fn criterion10() -> Outcome {
    let v: Vec<f64> = [17, 33, 65].par_iter().map(|&m| common::cubic_center_value(m)).collect();
    let ratio = (v[1] - v[0]) / (v[2] - v[1]);
    outcome(
        (3.0..=5.0).contains(&ratio),
        format!("u(0) at m = 17, 33, 65: {:.10}, {:.10}, {:.10}; difference ratio {ratio:.4}", v[0], v[1], v[2]),
    )
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", items.join(", "))
    }
}

fn main() -> ExitCode {
    let (verify, elapsed) = verify_run();
    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("lemma identity", Box::new(|| criterion1(&verify, elapsed))),
        ("proof-step bounds", Box::new(|| criterion2(&verify))),
        ("Newton-Maclaurin", Box::new(|| criterion3(&verify))),
        ("inverse duality", Box::new(|| criterion4(&verify))),
        ("quotient-to-sigma2 transformation", Box::new(criterion5)),
        ("Liouville rigidity", Box::new(criterion6)),
        ("c(n) values", Box::new(criterion7)),
        ("Jacobian correctness", Box::new(criterion8)),
        ("interior-estimate stability", Box::new(criterion9)),
        ("mesh order", Box::new(criterion10)),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<34} {} ({:.2?}): {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed in {:.2?}", criteria.len() - failed, criteria.len(), total.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
