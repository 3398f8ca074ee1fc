//! Maximal tubes around the singular core.
//!
//! With α the peripheral element of the filled cusp and γ the tie class,
//! `cosh 2R = |bc| + |bc + 1|` where `bc = −(tr[α,γ] − 2)/(tr²α − 4)`.
//! The core has length `t = 2|Re(r log(−m) + s log(−l))|`, the meridian on the
//! tube boundary has length `μ = θ sinh R`, and the normalized square is
//! `μ̂² = θ tanh R / t`. Near θ = 0, `μ̂² = k₀ + k₁θ² + O(θ³)`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::curve::GeometricCurve;
use crate::error::{Error, Result};
use crate::holonomy::commutator_trace_from_eigenvalues;
pub use crate::holonomy::ExtendedComplex;
use crate::jets::RealJet;
use crate::parallel::{self, Execution};
use crate::surgery::{cone_expansion, ConeSolver, ConeStructure, FirstCusp, Slope};

fn same(a: C64, b: C64) -> bool {
    (a - b).norm() <= 4.0 * f64::EPSILON * a.norm().max(b.norm())
}

/// `[w₁, w₂; w₃, w₄] = (w₁−w₃)(w₂−w₄)/((w₁−w₄)(w₂−w₃))`, with limits at ∞.
pub fn cross_ratio(w1: ExtendedComplex, w2: ExtendedComplex, w3: ExtendedComplex, w4: ExtendedComplex) -> Result<C64> {
    use ExtendedComplex::*;
    let pts = [w1, w2, w3, w4];
    if pts.iter().filter(|p| matches!(p, Infinity)).count() > 1 {
        return Err(Error::CoincidentEndpoints);
    }
    for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3), (0, 1), (2, 3)] {
        if let (Finite(a), Finite(b)) = (pts[i], pts[j]) {
            if same(a, b) {
                return Err(if i + 1 == j && i % 2 == 0 { Error::DegenerateLines } else { Error::CoincidentEndpoints });
            }
        }
    }
    Ok(match pts {
        [Infinity, Finite(b), Finite(c), Finite(d)] => (b - d) / (b - c),
        [Finite(a), Infinity, Finite(c), Finite(d)] => (a - c) / (a - d),
        [Finite(a), Finite(b), Infinity, Finite(d)] => (b - d) / (a - d),
        [Finite(a), Finite(b), Finite(c), Infinity] => (a - c) / (b - c),
        [Finite(a), Finite(b), Finite(c), Finite(d)] => (a - c) * (b - d) / ((a - d) * (b - c)),
        _ => unreachable!("at most one point at infinity"),
    })
}

/// Hyperbolic distance between the geodesics `(w₁, w₂)` and `(w₃, w₄)`;
/// zero when they meet.
pub fn line_distance(w1: ExtendedComplex, w2: ExtendedComplex, w3: ExtendedComplex, w4: ExtendedComplex) -> Result<f64> {
    let x = cross_ratio(w1, w2, w3, w4)?;
    let gap = (C64::new(1.0, 0.0) - x).norm();
    if gap <= 1e-15 * x.norm().max(1.0) {
        return Err(Error::DegenerateLines);
    }
    let cosh_d = (1.0 + x.norm()) / gap;
    Ok(cosh_d.max(1.0).acosh())
}

fn cosh2r_from(t: C64, denom: C64, scale: f64) -> Result<f64> {
    if denom.norm() <= 1e-14 * scale.max(1.0) {
        return Err(Error::Parabolic);
    }
    let bc = -t / denom;
    Ok(bc.norm() + (bc + 1.0).norm())
}

/// `cosh 2R` from `tr[α,γ] − 2` and `tr α`.
pub fn tube_cosh2r(tr_comm_minus2: C64, tr_peripheral: C64) -> Result<f64> {
    let tr2 = tr_peripheral * tr_peripheral;
    cosh2r_from(tr_comm_minus2, tr2 - 4.0, tr2.norm())
}

/// The same with `tr²α − 4 = (m − 1/m)²` formed from the eigenvalue, which
/// avoids the cancellation in `tr² − 4` near parabolic elements.
pub fn tube_cosh2r_from_eigenvalue(tr_comm_minus2: C64, m: C64) -> Result<f64> {
    let d = m - 1.0 / m;
    cosh2r_from(tr_comm_minus2, d * d, (m * m).norm() + 1.0)
}

/// `(|T| + |tr²α − (T + 2) − 2|)/|tr²α − 4|`, the displayed trace form with the
/// commutator trace `T + 2` substituted literally.
pub fn tube_cosh2r_displayed(tr_comm_minus2: C64, tr_peripheral: C64) -> Result<f64> {
    let tr2 = tr_peripheral * tr_peripheral;
    let denom = tr2 - 4.0;
    if denom.norm() <= 1e-14 * tr2.norm().max(1.0) {
        return Err(Error::Parabolic);
    }
    let comm = tr_comm_minus2 + 2.0;
    Ok((tr_comm_minus2.norm() + (tr2 - comm - 2.0).norm()) / denom.norm())
}

/// `t = 2|Re(r·log(−m) + s·log(−l))|` from branch-continued logs.
pub fn core_length(log_neg_m: C64, log_neg_l: C64, slope: &Slope) -> f64 {
    2.0 * (log_neg_m * slope.r as f64 + log_neg_l * slope.s as f64).re.abs()
}

/// Core length from eigenvalues near `(−1, −1)`, where the principal logs of
/// `−m`, `−l` are the continued branches.
pub fn core_length_from_eigenvalues(m: C64, l: C64, slope: &Slope) -> Result<f64> {
    for x in [-m, -l] {
        if !(x.re > 0.0) {
            return Err(Error::BranchContinuation(format!("{x} is outside the principal log region")));
        }
    }
    Ok(core_length((-m).ln(), (-l).ln(), slope))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeMeasurement {
    pub theta: f64,
    pub radius: f64,
    pub core_length: f64,
    pub mu: f64,
    pub mu_hat_sq: f64,
    pub cosh_2r: f64,
}

impl TubeMeasurement {
    pub fn new(theta: f64, cosh_2r: f64, core_length: f64) -> Result<Self> {
        if !(theta > 0.0) {
            return Err(Error::ZeroAngle);
        }
        if !(core_length > 0.0) || !(cosh_2r > 1.0) {
            return Err(Error::Parabolic);
        }
        let radius = cosh_2r.acosh() / 2.0;
        let mu = theta * radius.sinh();
        let mu_hat_sq = theta * radius.tanh() / core_length;
        let m = Self { theta, radius, core_length, mu, mu_hat_sq, cosh_2r };
        if [radius, mu, mu_hat_sq].iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("tube measurement"));
        }
        Ok(m)
    }

    /// Relative defect of `μ̂² = μ²/(θ·t·sinh R·cosh R)`.
    pub fn area_identity_residual(&self) -> f64 {
        let area = self.theta * self.core_length * self.radius.sinh() * self.radius.cosh();
        (self.mu * self.mu / area - self.mu_hat_sq).abs() / self.mu_hat_sq
    }
}

/// Tube data of an already solved cone structure.
pub fn measure(st: &ConeStructure, slope2: &Slope) -> Result<TubeMeasurement> {
    let (m2, l2) = (st.eigenvalues.m2, st.eigenvalues.l2);
    let comm = commutator_trace_from_eigenvalues(m2, l2)?;
    let cosh_2r = tube_cosh2r_from_eigenvalue(comm, m2)?;
    TubeMeasurement::new(st.theta, cosh_2r, core_length(st.log_m2(), st.log_l2(), slope2))
}

pub fn mu_hat_squared_with(solver: &ConeSolver, slope2: &Slope, theta: f64) -> Result<TubeMeasurement> {
    if !(theta > 0.0) {
        return Err(Error::ZeroAngle);
    }
    measure(&solver.solve(slope2, theta)?, slope2)
}

/// Full pipeline: solve the cone structure, then measure its tube.
pub fn mu_hat_squared_numeric(first: FirstCusp, slope2: &Slope, theta: f64) -> Result<TubeMeasurement> {
    if !(theta > 0.0) {
        return Err(Error::ZeroAngle);
    }
    mu_hat_squared_with(&ConeSolver::new(first)?, slope2, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSource {
    ClosedForm,
    NumericJet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KExpansion {
    pub k0: f64,
    pub k1: f64,
    pub slope2: Slope,
    pub source: KSource,
}

/// `μ̂²(θ)` as a real jet through θ², from the closed-form cone jets.
///
/// Every modulus is taken after factoring its known leading power:
/// `(m − 1/m)² = θ²·(…)`, while the commutator term and its difference
/// with `(m − 1/m)²` are nonzero at θ = 0.
pub fn mu_hat_squared_jet(curve: &GeometricCurve, slope2: &Slope) -> Result<RealJet> {
    let e = cone_expansion(curve, slope2)?;
    let (m, l) = (e.m_jet, e.l_jet);
    let one = C64::new(1.0, 0.0);
    let diff = m - m.recip()?;
    let d = diff * diff;
    let m2 = m * m;
    // T = −(m² − 1)(1 − l)/(l + m²); numerator and denominator both vanish at θ = 0.
    let num = (m2 - one).factor_power(1)?;
    let den = (l + m2).factor_power(1)?;
    let t = -(num * (-l + one).truncate(2) / den);
    let abs_t = t.modulus(0)?;
    let abs_t_minus_d = (t - d.truncate(2)).modulus(0)?;
    let abs_d = d.modulus(2)?.truncate(2);
    // X = 1/cosh 2R and tanh R = sqrt((1 − X)/(1 + X)).
    let x = abs_d / (abs_t + abs_t_minus_d);
    let tanh_r = ((-x + 1.0) / (x + 1.0)).sqrt(1.0)?;
    let combo = e.log_combo_jet.re().factor_power(1)?;
    let sign = combo.coeff(0).signum();
    let t_over_theta = combo * (2.0 * sign);
    tanh_r.try_div(&t_over_theta)
}

/// `(k₀, k₁)` by jet expansion of the tube formula.
pub fn k_expansion_closed_form(curve: &GeometricCurve, slope2: &Slope) -> Result<KExpansion> {
    let j = mu_hat_squared_jet(curve, slope2)?;
    Ok(KExpansion { k0: j.coeff(0), k1: j.coeff(2), slope2: *slope2, source: KSource::NumericJet })
}

/// `(−x⁴ − 8x³ − 48x² − 128x − 128)/(12(x² + 4x + 8)²)` at `x = p/q`,
/// written homogeneously so `q = 0` is allowed.
pub fn whitehead_k1(p: f64, q: f64) -> f64 {
    let num = -p.powi(4) - 8.0 * p.powi(3) * q - 48.0 * p * p * q * q - 128.0 * p * q.powi(3) - 128.0 * q.powi(4);
    let quad = p * p + 4.0 * p * q + 8.0 * q * q;
    num / (12.0 * quad * quad)
}

/// `k₀ = |p + a₁q|²/Im a₁`, which is `(p² + 4pq + 8q²)/2` for `a₁ = 2 + 2i`.
pub fn k0_from_curve(curve: &GeometricCurve, slope2: &Slope) -> f64 {
    slope2.weight(curve.a1).norm_sqr() / curve.a1.im.abs()
}

/// Closed-form `(k₀, k₁)` for the Whitehead curve with the first cusp complete.
pub fn k_expansion_whitehead(slope2: &Slope) -> KExpansion {
    let (p, q) = (slope2.p as f64, slope2.q as f64);
    KExpansion {
        k0: (p * p + 4.0 * p * q + 8.0 * q * q) / 2.0,
        k1: whitehead_k1(p, q),
        slope2: *slope2,
        source: KSource::ClosedForm,
    }
}

fn k1_rational(x: f64) -> f64 {
    whitehead_k1(x, 1.0)
}

fn k1_rational_derivative(x: f64) -> f64 {
    let n = -x.powi(4) - 8.0 * x.powi(3) - 48.0 * x * x - 128.0 * x - 128.0;
    let dn = -4.0 * x.powi(3) - 24.0 * x * x - 96.0 * x - 128.0;
    let q = x * x + 4.0 * x + 8.0;
    let dq = 2.0 * x + 4.0;
    (dn * q - 2.0 * n * dq) / (12.0 * q.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct K1Range {
    pub min: f64,
    pub max: f64,
    pub argmin: f64,
    /// `None` when the maximum is the `x → ±∞` limit.
    pub argmax: Option<f64>,
    pub samples: usize,
    pub refined_extrema: usize,
}

const X_BOUND: f64 = 1e4;
const CHUNK: usize = 1 << 15;

/// Min/max of the k₁ rational function over `x ∈ [−10⁴, 10⁴]` plus the
/// limit at infinity. The grid is uniform in `atan x`; each sign change of the
/// derivative between neighbours is refined by bisection.
pub fn k1_range_check(samples: usize, exec: Execution) -> K1Range {
    let n = samples.max(2);
    let phi_max = X_BOUND.atan();
    let x_at = |i: usize| {
        if i == 0 {
            -X_BOUND
        } else if i == n - 1 {
            X_BOUND
        } else {
            (-phi_max + 2.0 * phi_max * i as f64 / (n - 1) as f64).tan()
        }
    };
    let chunks = n.div_ceil(CHUNK);
    let partial = parallel::map_range(exec, chunks, |c| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(n - 1); // inclusive: shares an endpoint with the next chunk
        let mut best = (f64::INFINITY, 0.0, f64::NEG_INFINITY, 0.0, 0usize);
        let consider = |x: f64, best: &mut (f64, f64, f64, f64, usize)| {
            let f = k1_rational(x);
            if f < best.0 {
                best.0 = f;
                best.1 = x;
            }
            if f > best.2 {
                best.2 = f;
                best.3 = x;
            }
        };
        let mut prev_x = x_at(lo);
        let mut prev_d = k1_rational_derivative(prev_x);
        consider(prev_x, &mut best);
        for i in lo + 1..=hi {
            let x = x_at(i);
            let d = k1_rational_derivative(x);
            consider(x, &mut best);
            if prev_d == 0.0 || prev_d.signum() != d.signum() {
                let (mut a, mut b) = (prev_x, x);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if k1_rational_derivative(mid).signum() == prev_d.signum() {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                consider(0.5 * (a + b), &mut best);
                best.4 += 1;
            }
            prev_x = x;
            prev_d = d;
        }
        best
    });
    let mut range = K1Range {
        min: f64::INFINITY,
        max: -1.0 / 12.0,
        argmin: 0.0,
        argmax: None,
        samples: n,
        refined_extrema: 0,
    };
    for (mn, amn, mx, amx, refined) in partial {
        if mn < range.min {
            range.min = mn;
            range.argmin = amn;
        }
        if mx > range.max {
            range.max = mx;
            range.argmax = Some(amx);
        }
        range.refined_extrema += refined;
    }
    range
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub slope2: Slope,
    pub k1: f64,
    /// `k₁ < 0`: μ̂ decreases at θ = 0.
    pub mu_hat_decreasing: bool,
    /// `k₁ + 1 > 0`: μ̂² + θ² increases at θ = 0.
    pub sum_increasing: bool,
}

impl MonotonicityReport {
    pub fn from_k1(slope2: Slope, k1: f64) -> Self {
        Self { slope2, k1, mu_hat_decreasing: k1 < 0.0, sum_increasing: k1 + 1.0 > 0.0 }
    }

    pub fn holds(&self) -> bool {
        self.mu_hat_decreasing && self.sum_increasing
    }
}

pub fn monotonicity_report(curve: &GeometricCurve, slope2: &Slope) -> Result<MonotonicityReport> {
    let k = k_expansion_closed_form(curve, slope2)?;
    Ok(MonotonicityReport::from_k1(*slope2, k.k1))
}
