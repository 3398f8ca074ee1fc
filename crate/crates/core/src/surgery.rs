//! Cone-angle Dehn filling on the Whitehead link complement.
//!
//! The second cusp is filled along slope `(p₂, q₂)` with cone angle θ:
//! `p₂ log(−m₂) + q₂ log(−l₂) = iθ/2`. The first cusp is either left complete
//! (`m₁ = −1`) or filled along `(p₁, q₁)` with angle 2π:
//! `p₁ log(−m₁) + q₁ log(−l₁) = πi`. All logs are the branch-continued logs
//! of [`crate::gluing::cusp_logs`], which start at 0 at the complete structure.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};

use crate::curve::{self, CurveSampler, GeometricCurve, Sign, StencilConfig};
use crate::error::{Error, Result};
use crate::gluing::{self, cusp_logs, solve2, CuspEigenvalues, TetShapes};
use crate::jets::{Jet, Var};
use crate::parallel::{self, Execution};
use crate::tolerance;
use crate::BASE_SHAPE;

const I: C64 = C64::new(0.0, 1.0);

/// Coprime `(p, q)` with a dual `(r, s)`, `ps − qr = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Slope {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

impl Slope {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        let (g, x, y) = egcd(p, q);
        if g.abs() != 1 {
            return Err(Error::NotCoprime(p, q));
        }
        // p·x + q·y = g = ±1.
        let (s, r) = (x * g, -y * g);
        debug_assert_eq!(p * s - q * r, 1);
        Ok(Self { p, q, r, s })
    }

    pub fn pq(&self) -> (i64, i64) {
        (self.p, self.q)
    }

    /// `p + a₁q`.
    pub fn weight(&self, a1: C64) -> C64 {
        self.p as f64 + a1 * self.q as f64
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pq().cmp(&other.pq())
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// Coprime slopes with `|p| + |q| ≤ max_size`, one per unoriented class
/// (`q > 0`, or `(1, 0)`), sorted.
pub fn coprime_slopes(max_size: i64) -> Vec<Slope> {
    let mut out = Vec::new();
    for q in 0..=max_size {
        for p in -(max_size - q)..=(max_size - q) {
            if q == 0 && p != 1 {
                continue;
            }
            if let Ok(s) = Slope::new(p, q) {
                out.push(s);
            }
        }
    }
    out.sort();
    out
}

/// State of the first cusp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FirstCusp {
    Unfilled,
    Filled(Slope),
}

impl Ord for FirstCusp {
    /// Filled slopes in slope order, then the unfilled limit.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (FirstCusp::Filled(a), FirstCusp::Filled(b)) => a.cmp(b),
            (FirstCusp::Filled(_), FirstCusp::Unfilled) => Ordering::Less,
            (FirstCusp::Unfilled, FirstCusp::Filled(_)) => Ordering::Greater,
            (FirstCusp::Unfilled, FirstCusp::Unfilled) => Ordering::Equal,
        }
    }
}

impl PartialOrd for FirstCusp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FirstCusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FirstCusp::Unfilled => write!(f, "unfilled"),
            FirstCusp::Filled(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for FirstCusp {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FirstCusp::Unfilled => ser.serialize_str("unfilled"),
            FirstCusp::Filled(s) => s.serialize(ser),
        }
    }
}

/// θ-jets of `m`, `l` and `r·log(−m) + s·log(−l)` (order 3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeExpansion {
    pub slope: Slope,
    pub m_jet: Jet,
    pub l_jet: Jet,
    pub log_combo_jet: Jet,
}

impl ConeExpansion {
    /// `p·log(−m) + q·log(−l) − iθ/2` as a jet; vanishes through order 3.
    pub fn filling_defect(&self) -> Result<Jet> {
        let zero = C64::new(0.0, 0.0);
        let lm = (-self.m_jet).log(zero)?;
        let ll = (-self.l_jet).log(zero)?;
        let target = Jet::identity(Var::THETA, 3).scale_by(I / 2.0);
        Ok(lm * C64::new(self.slope.p as f64, 0.0) + ll * C64::new(self.slope.q as f64, 0.0) - target)
    }
}

fn require_symmetric_base(curve: &GeometricCurve) -> Result<()> {
    if curve.m0 != Sign::Minus || curve.l0 != Sign::Minus {
        return Err(Error::UnsupportedBase);
    }
    let defect = curve.involution_defect().norm();
    if defect >= 1e-9 {
        return Err(Error::InvolutionDefect(defect));
    }
    Ok(())
}

/// Closed-form expansion for involution-symmetric curves at `(−1, −1)`.
pub fn cone_expansion(curve: &GeometricCurve, slope: &Slope) -> Result<ConeExpansion> {
    require_symmetric_base(curve)?;
    let (a1, a3) = (curve.a1, curve.a3);
    let (p, q) = (slope.p as f64, slope.q as f64);
    let (r, s) = (slope.r as f64, slope.s as f64);
    let w = slope.weight(a1);
    let (w2, w4) = (w * w, w * w * w * w);
    let a12 = a1 * a1;
    let a13 = a12 * a1;
    let a14 = a13 * a1;
    let m = [
        C64::new(-1.0, 0.0),
        -I / (2.0 * w),
        1.0 / (8.0 * w2),
        I * (p + (3.0 * a1 - 3.0 * a12 + a13 - a3) * q) / (48.0 * w4),
    ];
    let l = [
        C64::new(-1.0, 0.0),
        -a1 * I / (2.0 * w),
        a12 / (8.0 * w2),
        I * ((-2.0 * a1 + 3.0 * a12 + a3) * p + a14 * q) / (48.0 * w4),
    ];
    let combo = [
        C64::new(0.0, 0.0),
        I * (r + a1 * s) / (2.0 * w),
        C64::new(0.0, 0.0),
        I * (2.0 * a1 - 3.0 * a12 + a13 - a3) * (p * s - q * r) / (48.0 * w4),
    ];
    Ok(ConeExpansion {
        slope: *slope,
        m_jet: Jet::new(Var::THETA, 3, &m)?,
        l_jet: Jet::new(Var::THETA, 3, &l)?,
        log_combo_jet: Jet::new(Var::THETA, 3, &combo)?,
    })
}

/// The same jets for any curve at `(−1, −1)`, by series reversion of the
/// filling relation instead of closed forms.
pub fn cone_expansion_by_reversion(curve: &GeometricCurve, slope: &Slope) -> Result<ConeExpansion> {
    if curve.m0 != Sign::Minus || curve.l0 != Sign::Minus {
        return Err(Error::UnsupportedBase);
    }
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    // m = −1 + Δ, so −m = 1 − Δ and −l = 1 − (l − l⁰)(Δ).
    let d = Jet::identity(Var::M_PLUS_1, 3);
    let neg_m = (-d).add_const(one);
    let neg_l = (-curve.series()).add_const(one);
    let (lm, ll) = (neg_m.log(zero)?, neg_l.log(zero)?);
    let g = lm * C64::new(slope.p as f64, 0.0) + ll * C64::new(slope.q as f64, 0.0);
    let theta_half = Jet::identity(Var::THETA, 3).scale_by(I / 2.0);
    let delta = g.reversion()?.compose(&theta_half)?;
    let m_jet = delta.add_const(-one);
    let l_jet = curve.series().compose(&delta)?.add_const(-one);
    let log_combo_jet = (-m_jet).log(zero)? * C64::new(slope.r as f64, 0.0)
        + (-l_jet).log(zero)? * C64::new(slope.s as f64, 0.0);
    Ok(ConeExpansion { slope: *slope, m_jet, l_jet, log_combo_jet })
}

/// `[dm, d²m, d³m, dl, d²l, d³l]` at θ = 0 without the symmetry assumption.
pub fn theta_derivatives_general(curve: &GeometricCurve, slope: &Slope) -> [C64; 6] {
    let (a1, a2, a3) = (curve.a1, curve.a2, curve.a3);
    let (p, q) = (slope.p as f64, slope.q as f64);
    let w = slope.weight(a1);
    let a12 = a1 * a1;
    let a13 = a12 * a1;
    let a14 = a13 * a1;
    let dm = -I / (2.0 * w);
    let d2m = (p + (a12 + a2) * q) / (4.0 * w.powi(3));
    let d2l = ((a1 - a2) * p + a13 * q) / (4.0 * w.powi(3));
    let d3m = I
        * (p * p
            + (6.0 * a12 - 2.0 * a13 + 6.0 * a2 - 2.0 * a1 - 3.0 * a1 * a2 - a3) * p * q
            + (a14 + 3.0 * a12 * a2 + 3.0 * a2 * a2 - a1 * a3) * q * q)
        / (8.0 * w.powi(5));
    let d3l = I
        * ((a1 - 3.0 * a2 + a3) * p * p
            + (6.0 * a13 - 2.0 * a14 - 2.0 * a12 - 6.0 * a12 * a2 - 3.0 * a2 * a2 + 3.0 * a1 * a2 + a1 * a3) * p * q
            + a14 * a1 * q * q)
        / (8.0 * w.powi(5));
    [dm, d2m, d3m, a1 * dm, d2l, d3l]
}

/// One complex equation `Σ cᵢ·logᵢ = target` in the cusp logs
/// `(log(−m₁), log(−l₁), log(−m₂), log(−l₂))`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogEquation {
    coeffs: [f64; 4],
    target: C64,
}

impl LogEquation {
    fn first_cusp(first: &FirstCusp, t: f64) -> Self {
        match first {
            FirstCusp::Unfilled => Self { coeffs: [1.0, 0.0, 0.0, 0.0], target: C64::new(0.0, 0.0) },
            FirstCusp::Filled(s) => Self { coeffs: [s.p as f64, s.q as f64, 0.0, 0.0], target: I * PI * t },
        }
    }

    fn cone(slope2: &Slope, theta: f64) -> Self {
        Self { coeffs: [0.0, 0.0, slope2.p as f64, slope2.q as f64], target: I * theta / 2.0 }
    }

    fn meridian(log_neg_m2: C64) -> Self {
        Self { coeffs: [0.0, 0.0, 1.0, 0.0], target: log_neg_m2 }
    }

    fn residual(&self, logs: &[C64; 4]) -> C64 {
        (0..4).map(|i| logs[i] * self.coeffs[i]).sum::<C64>() - self.target
    }

    fn scale(&self) -> f64 {
        self.coeffs.iter().fold(self.target.norm().max(1.0), |a, c| a.max(c.abs()))
    }
}

/// A solved point of the chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeStructure {
    pub theta: f64,
    pub u: C64,
    pub v: C64,
    pub shapes: TetShapes,
    /// `log(−m₁), log(−l₁), log(−m₂), log(−l₂)`, branch-continued.
    pub logs: [C64; 4],
    pub eigenvalues: CuspEigenvalues,
}

impl ConeStructure {
    fn at(shapes: TetShapes, theta: f64) -> Result<Self> {
        let logs = cusp_logs(&shapes)?;
        let (u, v) = shapes.chart();
        Ok(Self { theta, u, v, shapes, logs: logs.values, eigenvalues: logs.eigenvalues() })
    }

    pub fn log_m2(&self) -> C64 {
        self.logs[2]
    }

    pub fn log_l2(&self) -> C64 {
        self.logs[3]
    }

    /// Residuals of the two defining relations for this θ.
    pub fn filling_residuals(&self, first: &FirstCusp, slope2: &Slope) -> (C64, C64) {
        (
            LogEquation::first_cusp(first, 1.0).residual(&self.logs),
            LogEquation::cone(slope2, self.theta).residual(&self.logs),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeConfig {
    pub theta_step: f64,
    pub min_step: f64,
    pub theta_max: f64,
    pub max_newton_iter: usize,
    /// Largest accepted Newton update in max-norm before the step is retried smaller.
    pub max_update: f64,
    /// Steps used to move the first cusp from complete to filled.
    pub filled_base_steps: usize,
    /// Smallest `|p₁| + |q₁|` whose filled base point is trusted to lie in the chart.
    pub min_filled_size: i64,
}

impl Default for ConeConfig {
    fn default() -> Self {
        Self {
            theta_step: 0.01,
            min_step: 1e-4,
            theta_max: 0.5,
            max_newton_iter: 40,
            max_update: 0.1,
            filled_base_steps: 16,
            min_filled_size: 8,
        }
    }
}

/// Newton continuation on the chart for a fixed first-cusp condition.
///
/// Construction finds the θ = 0 point (the base point, or the filled base
/// point with `m₂ = −1`); every solve starts there.
#[derive(Debug, Clone)]
pub struct ConeSolver {
    first: FirstCusp,
    cfg: ConeConfig,
    start: ConeStructure,
}

impl ConeSolver {
    pub fn new(first: FirstCusp) -> Result<Self> {
        Self::with_config(first, ConeConfig::default())
    }

    pub fn with_config(first: FirstCusp, cfg: ConeConfig) -> Result<Self> {
        let base = ConeStructure::at(TetShapes::BASE, 0.0)?;
        let mut solver = Self { first, cfg, start: base };
        if let FirstCusp::Filled(s) = first {
            if s.p.abs() + s.q.abs() < cfg.min_filled_size {
                return Err(Error::FilledBase(format!(
                    "|p₁| + |q₁| = {} is below the configured minimum {}",
                    s.p.abs() + s.q.abs(),
                    cfg.min_filled_size
                )));
            }
            let step = 1.0 / cfg.filled_base_steps as f64;
            let eqs = |t: f64| [LogEquation::first_cusp(&first, t), LogEquation::meridian(C64::new(0.0, 0.0))];
            let start = solver
                .continuation(base, 1.0, step, eqs, |_| 0.0, None)
                .map_err(|e| Error::FilledBase(e.to_string()))?;
            solver.start = ConeStructure { theta: 0.0, ..start };
        }
        Ok(solver)
    }

    pub fn first(&self) -> FirstCusp {
        self.first
    }

    /// The θ = 0 structure.
    pub fn start(&self) -> &ConeStructure {
        &self.start
    }

    fn newton(&self, eqs: &[LogEquation; 2], from: &ConeStructure, theta: f64) -> Result<ConeStructure> {
        let tol = tolerance::newton() * eqs[0].scale().max(eqs[1].scale());
        let mut state = *from;
        let mut logs = cusp_logs(&state.shapes)?;
        let mut polished = false;
        for _ in 0..self.cfg.max_newton_iter {
            let f = [eqs[0].residual(&logs.values), eqs[1].residual(&logs.values)];
            let res = f[0].norm().max(f[1].norm());
            if res <= tol && polished {
                return ConeStructure::at(state.shapes, theta);
            }
            let mut j = [[C64::new(0.0, 0.0); 2]; 2];
            for (row, eq) in eqs.iter().enumerate() {
                for col in 0..2 {
                    j[row][col] = (0..4).map(|i| logs.grad[i][col] * eq.coeffs[i]).sum();
                }
            }
            let d = solve2(j, f)?;
            if d[0].norm().max(d[1].norm()) > self.cfg.max_update {
                return Err(Error::NewtonDivergence(format!("update {:.3e} too large", d[0].norm().max(d[1].norm()))));
            }
            let (u, v) = (state.u - d[0], state.v - d[1]);
            let shapes = gluing::solve_shapes_seeded(u, v, (state.shapes.z[2], state.shapes.z[3]))?;
            let next_logs = cusp_logs(&shapes)?;
            if res <= tol {
                // One extra step drives the samples to roundoff; keep it only if it helps.
                polished = true;
                let g = [eqs[0].residual(&next_logs.values), eqs[1].residual(&next_logs.values)];
                if g[0].norm().max(g[1].norm()) > res {
                    return ConeStructure::at(state.shapes, theta);
                }
            }
            state = ConeStructure { theta, u, v, shapes, logs: next_logs.values, eigenvalues: next_logs.eigenvalues() };
            logs = next_logs;
        }
        let f = [eqs[0].residual(&logs.values), eqs[1].residual(&logs.values)];
        let res = f[0].norm().max(f[1].norm());
        if res <= tol {
            ConeStructure::at(state.shapes, theta)
        } else {
            Err(Error::NewtonDivergence(format!("filling residual {res:.3e}")))
        }
    }

    /// Continue from parameter 0 to `to`, halving the step on failure.
    fn continuation(
        &self,
        start: ConeStructure,
        to: f64,
        step: f64,
        eqs: impl Fn(f64) -> [LogEquation; 2],
        theta_at: impl Fn(f64) -> f64,
        mut record: Option<&mut Vec<ConeStructure>>,
    ) -> Result<ConeStructure> {
        let mut state = start;
        let mut t = 0.0;
        let mut h = step;
        while t < to {
            let next = (t + h).min(to);
            match self.newton(&eqs(next), &state, theta_at(next)) {
                Ok(s) => {
                    state = s;
                    t = next;
                    if let Some(r) = record.as_deref_mut() {
                        r.push(state);
                    }
                    h = (h * 2.0).min(step);
                }
                Err(e) => {
                    h /= 2.0;
                    if h < self.cfg.min_step.min(step) {
                        return Err(match e {
                            Error::OutsideChart { .. } => e,
                            _ => Error::ContinuationStalled(h, t),
                        });
                    }
                }
            }
        }
        Ok(state)
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        if !(0.0..=self.cfg.theta_max).contains(&theta) {
            return Err(Error::ThetaOutOfRange(theta, self.cfg.theta_max));
        }
        Ok(())
    }

    /// Every accepted continuation step from θ = 0 up to `theta`.
    pub fn path(&self, slope2: &Slope, theta: f64) -> Result<Vec<ConeStructure>> {
        self.check_theta(theta)?;
        let mut out = vec![self.start];
        let first = self.first;
        let eqs = |t: f64| [LogEquation::first_cusp(&first, 1.0), LogEquation::cone(slope2, t)];
        self.continuation(self.start, theta, self.cfg.theta_step, eqs, |t| t, Some(&mut out))?;
        Ok(out)
    }

    pub fn solve(&self, slope2: &Slope, theta: f64) -> Result<ConeStructure> {
        Ok(*self.path(slope2, theta)?.last().expect("path includes the start"))
    }

    /// Structure with `m₂ = −1 + s` on the first-cusp curve.
    pub fn sample_structure(&self, s: C64) -> Result<ConeStructure> {
        let log_neg_m2 = (1.0 - s).ln();
        let first = self.first;
        let eqs = |t: f64| [LogEquation::first_cusp(&first, 1.0), LogEquation::meridian(log_neg_m2 * t)];
        // Stencil offsets are tiny; larger ones are walked in 0.05 steps.
        let step = if s.norm() <= 0.05 { 1.0 } else { 0.05 / s.norm() };
        self.continuation(self.start, 1.0, step, eqs, |_| 0.0, None)
    }
}

impl CurveSampler for ConeSolver {
    fn sample(&self, s: C64) -> Result<(C64, C64)> {
        let st = self.sample_structure(s)?;
        Ok((s - 1.0, st.eigenvalues.l2))
    }
}

pub fn solve_cone_structure(first: FirstCusp, slope2: &Slope, theta: f64) -> Result<ConeStructure> {
    ConeSolver::new(first)?.solve(slope2, theta)
}

/// Reentrant sampler `s ↦ (m₂, l₂) = (−1 + s, l₂)` along the first cusp's filled curve.
pub fn filled_curve_sampler(slope1: Slope) -> Result<ConeSolver> {
    ConeSolver::new(FirstCusp::Filled(slope1))
}

/// The second cusp's geometric curve with the first cusp in the given state.
pub fn sampled_curve(first: FirstCusp, stencil: &StencilConfig) -> Result<GeometricCurve> {
    let solver = ConeSolver::new(first)?;
    curve::expand_from_samples(&solver, Sign::Minus, Sign::Minus, stencil)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub slope1: FirstCusp,
    pub coefficients: Option<[C64; 3]>,
    /// `|aᵢ − aᵢ(reference)|` for i = 1, 2, 3.
    pub errors: Option<[f64; 3]>,
    pub involution_defect: Option<f64>,
    pub failure: Option<String>,
}

impl ConvergenceRow {
    pub fn symmetric(&self, tol: f64) -> bool {
        self.involution_defect.is_some_and(|d| d < tol)
    }
}

/// One row per first-cusp state, computed independently (in parallel when
/// enabled) and returned in slope order. Failures are recorded in-row.
pub fn convergence_table(
    slopes: &[FirstCusp],
    reference: &GeometricCurve,
    stencil: &StencilConfig,
    exec: Execution,
) -> Vec<ConvergenceRow> {
    let mut sorted = slopes.to_vec();
    sorted.sort();
    sorted.dedup();
    parallel::map(exec, &sorted, |first| match sampled_curve(*first, stencil) {
        Ok(c) => {
            let a = c.coefficients();
            let r = reference.coefficients();
            ConvergenceRow {
                slope1: *first,
                coefficients: Some(a),
                errors: Some(std::array::from_fn(|i| (a[i] - r[i]).norm())),
                involution_defect: Some(c.involution_defect().norm()),
                failure: None,
            }
        }
        Err(e) => ConvergenceRow {
            slope1: *first,
            coefficients: None,
            errors: None,
            involution_defect: None,
            failure: Some(e.to_string()),
        },
    })
}

/// Base chart value, exposed for reports.
pub const BASE_CHART: (C64, C64) = (BASE_SHAPE, BASE_SHAPE);
