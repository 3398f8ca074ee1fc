//! Shape variety of the four-tetrahedron Whitehead link triangulation.
//!
//! Two complex equations cut a surface out of (z₁,…,z₄)-space. The chart is
//! (z₁, z₂) = (u, v); (z₃, z₄) are recovered by Newton's method, continued
//! along a straight path from the complete structure so the solver stays on
//! the geometric sheet.
//!
//! Cusp eigenvalues are handled in logarithmic form, `log(−m)` etc. All four
//! shapes stay in the upper half-plane near the complete structure, where
//! principal `log z` and `log(1 − z)` are the branches continued from the base,
//! so the logs of −eigenvalues start at 0 and are continuous.

use num_complex::Complex64 as C64;
use serde::Serialize;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::tolerance;
use crate::BASE_SHAPE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TetShapes {
    pub z: [C64; 4],
}

impl TetShapes {
    pub const BASE: TetShapes = TetShapes { z: [BASE_SHAPE; 4] };

    pub fn chart(&self) -> (C64, C64) {
        (self.z[0], self.z[1])
    }
}

/// The two gluing residuals; both vanish exactly on the variety.
pub fn gluing_residual(s: &TetShapes) -> (C64, C64) {
    let [z1, z2, z3, z4] = s.z;
    let one = C64::new(1.0, 0.0);
    let f1 = (one - z1) * (one - z4) - (one - z2) * (one - z3);
    let f2 = (one - z1) * (one - z2) * (one - z3) * (one - z4) - z1 * z2 * z3 * z4;
    (f1, f2)
}

fn residual_norm(s: &TetShapes) -> f64 {
    let (a, b) = gluing_residual(s);
    a.norm().max(b.norm())
}

/// ∂(F₁, F₂)/∂(zᵢ) as columns, i = 1..4.
fn partials(s: &TetShapes) -> [[C64; 2]; 4] {
    let one = C64::new(1.0, 0.0);
    let [z1, z2, z3, z4] = s.z;
    let w = [one - z1, one - z2, one - z3, one - z4];
    let prod_w = |skip: usize| (0..4).filter(|&j| j != skip).map(|j| w[j]).product::<C64>();
    let prod_z = |skip: usize| (0..4).filter(|&j| j != skip).map(|j| s.z[j]).product::<C64>();
    let df1 = [-w[3], w[2], w[1], -w[0]];
    let mut cols = [[C64::new(0.0, 0.0); 2]; 4];
    for i in 0..4 {
        cols[i] = [df1[i], -prod_w(i) - prod_z(i)];
    }
    cols
}

pub(crate) fn solve2(j: [[C64; 2]; 2], r: [C64; 2]) -> Result<[C64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().fold(0.0_f64, |a, x| a.max(x.norm()));
    if !(det.norm() > 1e-14 * scale * scale) {
        return Err(Error::SingularJacobian("2x2 system"));
    }
    Ok([
        (r[0] * j[1][1] - r[1] * j[0][1]) / det,
        (j[0][0] * r[1] - j[1][0] * r[0]) / det,
    ])
}

/// 2-norm condition number of a complex 2×2 matrix.
pub(crate) fn condition2(j: [[C64; 2]; 2]) -> f64 {
    let fro2: f64 = j.iter().flatten().map(|x| x.norm_sqr()).sum();
    let det = (j[0][0] * j[1][1] - j[0][1] * j[1][0]).norm();
    if det == 0.0 {
        return f64::INFINITY;
    }
    // σ₁σ₂ = |det|, σ₁² + σ₂² = ‖J‖_F².
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let s1 = ((fro2 + disc) / 2.0).sqrt();
    let s2 = det / s1;
    s1 / s2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartConfig {
    /// Max-norm radius around the base chart value.
    pub radius: f64,
    pub max_newton_iter: usize,
    pub max_continuation_steps: usize,
    /// Continuation step length target; far targets use more steps, up to the cap.
    pub step_length: f64,
    /// Startup bound on the base Jacobian's condition number.
    pub max_condition: f64,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self {
            radius: 0.35,
            max_newton_iter: 50,
            max_continuation_steps: 16,
            step_length: 0.025,
            max_condition: 1e6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShapeSolver {
    cfg: ChartConfig,
}

impl ShapeSolver {
    /// Checks that (z₃, z₄) are good solved variables at the base point.
    pub fn new(cfg: ChartConfig) -> Result<Self> {
        let cond = base_chart_condition();
        if !(cond < cfg.max_condition) {
            return Err(Error::IllConditionedChart(cond));
        }
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &ChartConfig {
        &self.cfg
    }

    pub fn chart_offset(&self, u: C64, v: C64) -> f64 {
        (u - BASE_SHAPE).norm().max((v - BASE_SHAPE).norm())
    }

    fn check_chart(&self, u: C64, v: C64) -> Result<()> {
        let offset = self.chart_offset(u, v);
        if !(offset <= self.cfg.radius) {
            return Err(Error::OutsideChart { offset, radius: self.cfg.radius });
        }
        Ok(())
    }

    /// Solve for (z₃, z₄) by continuation from the base point.
    pub fn solve(&self, u: C64, v: C64) -> Result<TetShapes> {
        self.check_chart(u, v)?;
        let dist = self.chart_offset(u, v);
        let steps = ((dist / self.cfg.step_length).ceil() as usize).clamp(1, self.cfg.max_continuation_steps);
        let mut seed = (BASE_SHAPE, BASE_SHAPE);
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            let uk = BASE_SHAPE + (u - BASE_SHAPE) * t;
            let vk = BASE_SHAPE + (v - BASE_SHAPE) * t;
            let s = self.newton(uk, vk, seed)?;
            seed = (s.z[2], s.z[3]);
        }
        self.newton(u, v, seed)
    }

    /// Newton from a nearby seed for (z₃, z₄); no continuation.
    pub fn solve_seeded(&self, u: C64, v: C64, seed: (C64, C64)) -> Result<TetShapes> {
        self.check_chart(u, v)?;
        self.newton(u, v, seed)
    }

    fn newton(&self, u: C64, v: C64, seed: (C64, C64)) -> Result<TetShapes> {
        let tol = tolerance::newton();
        let mut s = TetShapes { z: [u, v, seed.0, seed.1] };
        let mut res = residual_norm(&s);
        for _ in 0..self.cfg.max_newton_iter {
            if res <= tol {
                return Ok(s);
            }
            let (f1, f2) = gluing_residual(&s);
            let p = partials(&s);
            let j = [[p[2][0], p[3][0]], [p[2][1], p[3][1]]];
            let d = solve2(j, [f1, f2])?;
            s.z[2] -= d[0];
            s.z[3] -= d[1];
            if !(s.z[2].is_finite() && s.z[3].is_finite()) {
                return Err(Error::NewtonDivergence("non-finite shape iterate".into()));
            }
            res = residual_norm(&s);
        }
        // Roundoff floor: accept anything within the identity tolerance.
        if res <= tolerance::identity() {
            Ok(s)
        } else {
            Err(Error::NewtonDivergence(format!("shape residual {res:.3e}")))
        }
    }
}

fn default_solver() -> &'static ShapeSolver {
    static SOLVER: OnceLock<ShapeSolver> = OnceLock::new();
    SOLVER.get_or_init(|| ShapeSolver::new(ChartConfig::default()).expect("base chart is well-conditioned"))
}

/// Condition number of ∂(F₁,F₂)/∂(z₃,z₄) at the complete structure.
pub fn base_chart_condition() -> f64 {
    let p = partials(&TetShapes::BASE);
    condition2([[p[2][0], p[3][0]], [p[2][1], p[3][1]]])
}

/// Shapes at chart point (u, v) with the default chart configuration.
pub fn solve_shapes(u: C64, v: C64) -> Result<TetShapes> {
    default_solver().solve(u, v)
}

pub fn solve_shapes_seeded(u: C64, v: C64, seed: (C64, C64)) -> Result<TetShapes> {
    default_solver().solve_seeded(u, v, seed)
}

/// `log(−m₁), log(−l₁), log(−m₂), log(−l₂)` and their (u, v)-gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspLogs {
    pub values: [C64; 4],
    pub grad: [[C64; 2]; 4],
}

impl CuspLogs {
    pub fn log_m1(&self) -> C64 {
        self.values[0]
    }
    pub fn log_l1(&self) -> C64 {
        self.values[1]
    }
    pub fn log_m2(&self) -> C64 {
        self.values[2]
    }
    pub fn log_l2(&self) -> C64 {
        self.values[3]
    }

    pub fn eigenvalues(&self) -> CuspEigenvalues {
        let e = |x: C64| -x.exp();
        CuspEigenvalues {
            m1: e(self.values[0]),
            l1: e(self.values[1]),
            m2: e(self.values[2]),
            l2: e(self.values[3]),
        }
    }
}

// Each eigenvalue log is Σ αᵢ log zᵢ + Σ βᵢ log(1 − zᵢ).
type LogForm = ([f64; 4], [f64; 4]);

const PRIMARY_FORMS: [LogForm; 4] = [
    ([0.0, 0.0, 0.0, 0.0], [0.0, -0.5, 0.0, 0.5]),
    ([-0.5, -0.5, 0.5, 0.5], [0.0, -1.0, 0.0, 1.0]),
    ([0.0, 0.0, 0.0, 0.0], [-0.5, 0.5, 0.0, 0.0]),
    ([-0.5, 0.5, -0.5, 0.5], [-1.0, 1.0, 0.0, 0.0]),
];

const ALTERNATE_FORMS: [LogForm; 4] = [
    ([0.0, 0.0, 0.0, 0.0], [-0.5, 0.0, 0.5, 0.0]),
    ([-0.5, -0.5, 0.5, 0.5], [-1.0, 0.0, 1.0, 0.0]),
    ([0.0, 0.0, 0.0, 0.0], [0.0, 0.0, -0.5, 0.5]),
    ([-0.5, 0.5, -0.5, 0.5], [0.0, 0.0, -1.0, 1.0]),
];

fn shape_logs(s: &TetShapes) -> Result<([C64; 4], [C64; 4])> {
    let one = C64::new(1.0, 0.0);
    let mut a = [C64::new(0.0, 0.0); 4];
    let mut b = a;
    for i in 0..4 {
        let z = s.z[i];
        if !(z.im > 0.0) {
            return Err(Error::BranchContinuation(format!(
                "shape z{} = {z} left the upper half-plane",
                i + 1
            )));
        }
        a[i] = z.ln();
        b[i] = (one - z).ln();
    }
    Ok((a, b))
}

fn apply_forms(forms: &[LogForm; 4], a: &[C64; 4], b: &[C64; 4]) -> [C64; 4] {
    let mut out = [C64::new(0.0, 0.0); 4];
    for (k, (fa, fb)) in forms.iter().enumerate() {
        out[k] = (0..4).map(|i| a[i] * fa[i] + b[i] * fb[i]).sum();
    }
    out
}

/// Branch-continued logs of the negated eigenvalues, with analytic gradients.
pub fn cusp_logs(s: &TetShapes) -> Result<CuspLogs> {
    let (a, b) = shape_logs(s)?;
    let values = apply_forms(&PRIMARY_FORMS, &a, &b);

    // dz/d(u,v): identity on (z₁,z₂), implicit function theorem on (z₃,z₄).
    let p = partials(s);
    let j = [[p[2][0], p[3][0]], [p[2][1], p[3][1]]];
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut dz = [[zero; 2]; 4];
    dz[0] = [one, zero];
    dz[1] = [zero, one];
    for col in 0..2 {
        let d = solve2(j, [-p[col][0], -p[col][1]])?;
        dz[2][col] = d[0];
        dz[3][col] = d[1];
    }

    let mut grad = [[zero; 2]; 4];
    for (k, (fa, fb)) in PRIMARY_FORMS.iter().enumerate() {
        for i in 0..4 {
            let dl_dz = fa[i] / s.z[i] - fb[i] / (one - s.z[i]);
            grad[k][0] += dl_dz * dz[i][0];
            grad[k][1] += dl_dz * dz[i][1];
        }
    }
    Ok(CuspLogs { values, grad })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspEigenvalues {
    pub m1: C64,
    pub l1: C64,
    pub m2: C64,
    pub l2: C64,
}

impl CuspEigenvalues {
    pub fn as_array(&self) -> [C64; 4] {
        [self.m1, self.l1, self.m2, self.l2]
    }
}

pub fn cusp_eigenvalues(s: &TetShapes) -> Result<CuspEigenvalues> {
    Ok(cusp_logs(s)?.eigenvalues())
}

/// The same eigenvalues from the second expression of each relation; agrees
/// with [`cusp_eigenvalues`] on the variety.
pub fn cusp_eigenvalues_alternate(s: &TetShapes) -> Result<CuspEigenvalues> {
    let (a, b) = shape_logs(s)?;
    let v = apply_forms(&ALTERNATE_FORMS, &a, &b);
    let e = |x: C64| -x.exp();
    Ok(CuspEigenvalues { m1: e(v[0]), l1: e(v[1]), m2: e(v[2]), l2: e(v[3]) })
}
