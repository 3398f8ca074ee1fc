//! Reproducible structural invariant suite.
//!
//! Every check draws its points from a fixed-seed ChaCha stream, so two runs
//! report identical residuals.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gluing::{cusp_eigenvalues, gluing_residual, solve_shapes};
use crate::holonomy::{
    build_representation, commutator_trace_from_eigenvalues, cusp_relation_residuals, l2_eigenvalue, Letter,
    BASE_X, BASE_Y,
};
use crate::parallel::{self, Execution};
use crate::BASE_SHAPE;

pub const SEED: u64 = 0x5eed_c0de;
pub const POINTS: usize = 100;
pub const CHART_RADIUS: f64 = 0.3;
pub const HOLONOMY_RADIUS: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub count: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// First failure that prevented a point from being evaluated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }
}

fn disc_points(rng: &mut ChaCha8Rng, center: C64, radius: f64, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            // Uniform in the disc.
            let r = radius * rng.gen::<f64>().sqrt();
            center + C64::from_polar(r, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        })
        .collect()
}

fn check(name: &'static str, tolerance: f64, results: Vec<Result<f64>>) -> CheckResult {
    let count = results.len();
    let mut max_residual: f64 = 0.0;
    let mut error = None;
    for r in results {
        match r {
            Ok(x) if x.is_finite() => max_residual = max_residual.max(x),
            Ok(_) => error = error.or(Some("non-finite residual".to_string())),
            Err(e) => error = error.or(Some(e.to_string())),
        }
    }
    CheckResult { name, count, max_residual, tolerance, passed: error.is_none() && max_residual < tolerance, error }
}

fn gluing_points(rng: &mut ChaCha8Rng) -> Vec<(C64, C64)> {
    let u = disc_points(rng, BASE_SHAPE, CHART_RADIUS, POINTS);
    let v = disc_points(rng, BASE_SHAPE, CHART_RADIUS, POINTS);
    u.into_iter().zip(v).collect()
}

fn holonomy_points(rng: &mut ChaCha8Rng) -> Vec<(C64, C64)> {
    let x = disc_points(rng, BASE_X, HOLONOMY_RADIUS, POINTS);
    let y = disc_points(rng, BASE_Y, HOLONOMY_RADIUS, POINTS);
    x.into_iter().zip(y).collect()
}

pub fn gluing_check(exec: Execution) -> CheckResult {
    let pts = gluing_points(&mut ChaCha8Rng::seed_from_u64(SEED));
    let res = parallel::map(exec, &pts, |&(u, v)| {
        let s = solve_shapes(u, v)?;
        let (r1, r2) = gluing_residual(&s);
        Ok(r1.norm().max(r2.norm()))
    });
    check("gluing residuals", 1e-12, res)
}

pub fn holonomy_relation_check(exec: Execution) -> CheckResult {
    let pts = holonomy_points(&mut ChaCha8Rng::seed_from_u64(SEED + 1));
    let res = parallel::map(exec, &pts, |&(x, y)| Ok(build_representation(x, y)?.relation_residual()));
    check("holonomy group relations", 1e-11, res)
}

/// `tr ρ(αγα⁻¹γ⁻¹) − 2` from the matrices against its eigenvalue form, with
/// `l₂` taken from the explicit longitude word.
pub fn commutator_trace_check(exec: Execution) -> CheckResult {
    use Letter::*;
    let pts = holonomy_points(&mut ChaCha8Rng::seed_from_u64(SEED + 2));
    let res = parallel::map(exec, &pts, |&(x, y)| {
        let rep = build_representation(x, y)?;
        let comm = rep.word(&[A, C, AInv, CInv]).trace() - 2.0;
        let l2 = l2_eigenvalue(x, y)?;
        let formula = commutator_trace_from_eigenvalues(x, l2)?;
        let word_l2 = rep.word(crate::holonomy::WORD_L2).a;
        Ok((comm - formula).norm().max((comm + y).norm()).max((word_l2 - l2).norm()))
    });
    check("commutator trace identity", 1e-10, res)
}

pub fn cusp_trace_check(exec: Execution) -> CheckResult {
    let pts = gluing_points(&mut ChaCha8Rng::seed_from_u64(SEED + 3));
    let res = parallel::map(exec, &pts, |&(u, v)| {
        let e = cusp_eigenvalues(&solve_shapes(u, v)?)?;
        let (r1, r2) = cusp_relation_residuals(e.m1, e.l1, e.m2, e.l2)?;
        Ok(r1.norm().max(r2.norm()))
    });
    check("cusp trace relations", 1e-9, res)
}

pub fn run_suite(exec: Execution) -> VerificationReport {
    VerificationReport {
        seed: SEED,
        checks: vec![
            gluing_check(exec),
            holonomy_relation_check(exec),
            commutator_trace_check(exec),
            cusp_trace_check(exec),
        ],
    }
}
